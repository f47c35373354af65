import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthoem import (
    DomainError,
    PenaltySpec,
    SolverOptions,
    _backend,
    expand,
    fit,
    objective,
    oem_step,
    pinv_least_squares,
)
from orthoem.solver import find_aliases

from designs import LASSO_FF, OLS_FF, X_FF, Y_FF, random_problem

RAW = dict(standardize=False)


def test_two_level_lasso_and_ols():
    res = fit(X_FF, Y_FF, PenaltySpec("lasso", 1.0), SolverOptions(**RAW))
    np.testing.assert_allclose(res.beta, LASSO_FF, atol=1e-12)
    assert res.converged and res.expansion["d"] == 8.0
    res = fit(X_FF, Y_FF, PenaltySpec("none"), SolverOptions(**RAW))
    np.testing.assert_allclose(res.beta, OLS_FF, atol=1e-12)


def test_standardized_fit_rescales_lambda():
    # columns have norm 2, so lambda on the unit-norm scale is halved
    a = fit(X_FF, Y_FF, PenaltySpec("lasso", 0.5), SolverOptions())
    np.testing.assert_allclose(a.beta, LASSO_FF, atol=1e-10)


def test_fixed_point_at_convergence():
    rng = np.random.default_rng(11)
    x, y = random_problem(rng, 40, 8)
    for kind in ["lasso", "scad", "mcp", "elastic_net", "berhu"]:
        s = PenaltySpec(kind, 0.3, lam2=0.2)
        res = fit(x, y, s, SolverOptions(tol=1e-12, **RAW))
        exp = expand(x, min_d=1.0 if kind in ("scad", "mcp") else None)
        np.testing.assert_allclose(oem_step(res.u_final, exp, s), res.beta, atol=1e-9)


@pytest.mark.parametrize("kind", ["none", "lasso", "elastic_net", "scad", "mcp", "garrote", "berhu", "bridge"])
def test_trace_nonincreasing(kind):
    rng = np.random.default_rng(7)
    x, y = random_problem(rng, 30, 12)
    base = pinv_least_squares(x, y)
    s = PenaltySpec(kind, 0.5, lam2=0.3, garrote_base=base if kind == "garrote" else None)
    for standardize in (True, False):
        res = fit(x, y, s, SolverOptions(record_trace=True, standardize=standardize, max_iter=500))
        tr = np.array(res.objective_trace)
        assert np.all(np.diff(tr) <= 1e-10 * max(1.0, abs(tr[0])))
        assert res.path.shape == (len(tr), 12)
        np.testing.assert_allclose(res.path[-1], res.beta)


def test_rank_deficient_ols_is_min_norm():
    rng = np.random.default_rng(2)
    x, y = random_problem(rng, 15, 8, rank=4)
    res = fit(x, y, PenaltySpec("none"), SolverOptions(tol=1e-12, max_iter=100_000, **RAW))
    np.testing.assert_allclose(res.beta, pinv_least_squares(x, y), atol=1e-7)


def test_ols_fitted_values_do_not_depend_on_standardization():
    rng = np.random.default_rng(4)
    x, y = random_problem(rng, 50, 5)
    x *= [1.0, 3.0, 0.5, 2.0, 1.0]
    opts = dict(tol=1e-15, max_iter=200_000)
    a = fit(x, y, PenaltySpec("none"), SolverOptions(standardize=True, **opts))
    b = fit(x, y, PenaltySpec("none"), SolverOptions(standardize=False, **opts))
    np.testing.assert_allclose(x @ a.beta, x @ b.beta, atol=1e-10)


def test_lasso_kkt_conditions():
    rng = np.random.default_rng(9)
    x, y = random_problem(rng, 40, 10)
    lam = 2.0
    res = fit(x, y, PenaltySpec("lasso", lam), SolverOptions(tol=1e-13, max_iter=100_000, **RAW))
    grad = x.T @ (y - x @ res.beta)  # subgradient condition: grad_j in lam * d|b_j|
    act = res.beta != 0
    np.testing.assert_allclose(grad[act], lam * np.sign(res.beta[act]), atol=1e-6)
    assert np.all(np.abs(grad[~act]) <= lam + 1e-6)


def test_accelerated_matches_plain_and_descends():
    rng = np.random.default_rng(12)
    x, y = random_problem(rng, 60, 15, corr=0.8)
    for kind in ["lasso", "scad"]:
        s = PenaltySpec(kind, 0.2)
        plain = fit(x, y, s, SolverOptions(tol=1e-10, record_trace=True))
        fast = fit(x, y, s, SolverOptions(tol=1e-10, accelerate=True, record_trace=True))
        assert fast.converged
        assert fast.iterations < plain.iterations
        tr = np.array(fast.objective_trace)
        assert np.all(np.diff(tr) <= 1e-10 * abs(tr[0]))
        if kind == "lasso":
            np.testing.assert_allclose(fast.beta, plain.beta, atol=1e-6)


@pytest.mark.parametrize("groups", [1, 2, 3, 15])
def test_hybrid_groups_reach_same_lasso_solution(groups):
    rng = np.random.default_rng(13)
    x, y = random_problem(rng, 60, 15)
    s = PenaltySpec("lasso", 0.1)
    ref = fit(x, y, s, SolverOptions(tol=1e-12, max_iter=100_000))
    res = fit(x, y, s, SolverOptions(tol=1e-12, groups=groups, record_trace=True))
    assert res.converged
    np.testing.assert_allclose(res.beta, ref.beta, atol=1e-7)
    tr = np.array(res.objective_trace)
    assert np.all(np.diff(tr) <= 1e-10 * abs(tr[0]))
    if groups > 1:
        assert res.inner_iterations >= res.iterations


def test_hybrid_rejects_too_many_groups():
    x, y = random_problem(np.random.default_rng(0), 10, 3)
    with pytest.raises(DomainError):
        fit(x, y, PenaltySpec("lasso", 0.1), SolverOptions(groups=4))


def test_init_choices():
    rng = np.random.default_rng(14)
    x, y = random_problem(rng, 30, 5)
    s = PenaltySpec("none")
    res = fit(x, y, s, SolverOptions(init="ols", record_trace=True))
    np.testing.assert_allclose(res.path[0], pinv_least_squares(x, y), atol=1e-10)
    assert res.iterations == 1
    start = np.arange(5.0)
    res = fit(x, y, s, SolverOptions(init=start, record_trace=True))
    np.testing.assert_allclose(res.path[0], start, atol=1e-12)
    with pytest.raises(ValueError):
        fit(x, y, s, SolverOptions(init=np.ones(3)))
    with pytest.raises(DomainError):
        SolverOptions(init="random")


@pytest.mark.parametrize(
    "kw", [dict(tol=0.0), dict(max_iter=0), dict(groups=0), dict(inflate=0.9)]
)
def test_option_validation(kw):
    with pytest.raises(DomainError):
        SolverOptions(**kw)


def test_non_convergence_is_reported():
    x, y = random_problem(np.random.default_rng(1), 30, 6, corr=0.9)
    res = fit(x, y, PenaltySpec("lasso", 0.01), SolverOptions(max_iter=2, tol=1e-14))
    assert not res.converged and res.iterations == 2


def test_shape_errors():
    with pytest.raises(ValueError):
        fit(np.ones((4, 2)), np.ones(3), PenaltySpec("none"))
    with pytest.raises(ValueError):
        fit(X_FF, Y_FF, PenaltySpec("none"), SolverOptions(**RAW), expansion=expand(X_FF[:, :3]))


def test_garrote_fit_respects_signs():
    rng = np.random.default_rng(15)
    x, y = random_problem(rng, 40, 6)
    base = pinv_least_squares(x, y)
    res = fit(x, y, PenaltySpec("garrote", 0.5, garrote_base=base))
    assert np.all(res.beta * base >= 0)
    assert res.converged


def test_objective_definition():
    b = np.array([0.5, -1.0, 0, 0, 0, 0])
    r = Y_FF - X_FF @ b
    assert objective(X_FF, Y_FF, b, PenaltySpec("lasso", 1.0)) == pytest.approx(r @ r + 3.0)


def test_find_aliases_sign_canonical():
    x = np.column_stack([[1.0, -2, 3], [-1.0, 2, -3], [0.0, 1, 1], [1.0, -2, 3], [0.0, -1, -1]])
    rep, other, sign = find_aliases(x)
    got = sorted(zip(rep.tolist(), other.tolist(), sign.tolist()))
    assert got == [(0, 1, -1.0), (0, 3, 1.0), (2, 4, -1.0)]


@pytest.mark.skipif(len(_backend.available()) < 2, reason="compiled kernels not built")
@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["none", "lasso", "scad", "mcp", "berhu", "bridge", "elastic_net"]), st.integers(0, 10**6))
def test_backends_agree(kind, seed):
    rng = np.random.default_rng(seed)
    x, y = random_problem(rng, 25, 7)
    s = PenaltySpec(kind, 0.4, lam2=0.1)
    out = {}
    for name in _backend.available():
        prev = _backend.use_backend(name)
        try:
            out[name] = fit(x, y, s, SolverOptions(max_iter=300))
        finally:
            _backend.use_backend(prev)
    a, b = out.values()
    assert a.iterations == b.iterations or abs(a.iterations - b.iterations) <= 2
    np.testing.assert_allclose(a.beta, b.beta, atol=1e-8)
