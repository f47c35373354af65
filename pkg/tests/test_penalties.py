import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthoem import DomainError, PenaltySpec, penalty_value, solve_scalar
from orthoem.penalties import penalty_terms, threshold

from scalar_oracle import agrees


def spec(kind, lam=1.0, **kw):
    return PenaltySpec(kind, lam, **kw)


@pytest.mark.parametrize(
    "d, u, want", [(1.0, 2.0, 1.0), (2.0, -3.0, -1.0), (1.0, 0.5, 0.0)]
)
def test_lasso_cases(d, u, want):
    assert solve_scalar(d, u, 0, spec("lasso")) == pytest.approx(want)


@pytest.mark.parametrize("u, want", [(1.5, 0.5), (3.0, 4.4 / 1.7), (5.0, 5.0)])
def test_scad_cases(u, want):
    assert solve_scalar(1.0, u, 0, spec("scad", a=3.7)) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("u, want", [(2.0, 2.5 / 1.5), (3.0, 3.0), (0.5, 0.0)])
def test_mcp_cases(u, want):
    assert solve_scalar(1.0, u, 0, spec("mcp", a=2.5)) == pytest.approx(want, abs=1e-12)


def test_scad_middle_branch_against_fine_grid():
    grid = np.arange(-10, 10 + 1e-9, 1e-5)
    s = spec("scad", a=3.7)
    obj = grid**2 - 6.0 * grid + penalty_terms(grid, s)
    assert abs(grid[np.argmin(obj)] - 4.4 / 1.7) < 2e-5


def test_bridge_cases():
    s = spec("bridge", a=0.5)
    assert solve_scalar(1.0, 0.0, 0, s) == 0.0
    ok, best = agrees("bridge", solve_scalar(1.0, 3.0, 0, s), 1.0, 3.0, tol=1e-6, lam=1.0, a=0.5)
    assert ok, best


def test_none_is_exact_division():
    rng = np.random.default_rng(3)
    for d, u in rng.uniform(0.1, 10, (50, 2)) * [1, -1]:
        assert solve_scalar(d, u, 0, spec("none", 0.0)) == u / d


def test_garrote_uses_base_entry():
    s = PenaltySpec("garrote", 1.0, garrote_base=np.array([2.0, -0.5]))
    assert solve_scalar(1.0, 3.0, 0, s) == pytest.approx(((3 * 2 - 1) / 4) * 2)
    assert solve_scalar(1.0, 3.0, 1, s) == 0.0
    assert solve_scalar(1.0, -3.0, 1, s) == pytest.approx(((1.5 - 1) / 0.25) * -0.5)


def test_elastic_net_and_berhu_formulas():
    assert solve_scalar(2.0, 5.0, 0, spec("elastic_net", lam2=1.0)) == pytest.approx(4.0 / 3.0)
    b = spec("berhu", delta=0.5)
    assert solve_scalar(1.0, 1.2, 0, b) == pytest.approx(0.2)
    assert solve_scalar(1.0, 3.0, 0, b) == pytest.approx(3.0 * 0.5 / 1.5)


def test_domain_errors():
    with pytest.raises(DomainError):
        spec("scad", a=2.0)
    with pytest.raises(DomainError):
        spec("mcp", a=1.0)
    with pytest.raises(DomainError):
        spec("bridge", a=1.0)
    with pytest.raises(DomainError):
        spec("berhu", delta=0.0)
    with pytest.raises(DomainError):
        PenaltySpec("garrote", 1.0)
    with pytest.raises(DomainError):
        PenaltySpec("garrote", 1.0, garrote_base=np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        spec("lasso", lam=-1.0)
    with pytest.raises(DomainError):
        solve_scalar(0.0, 1.0, 0, spec("lasso"))
    with pytest.raises(DomainError):
        solve_scalar(0.5, 1.0, 0, spec("scad"))
    with pytest.raises(DomainError):
        solve_scalar(0.5, 1.0, 0, spec("mcp"))


def test_penalty_values():
    assert penalty_value([1.0, -2.0], spec("lasso")) == 6.0
    assert penalty_value(np.zeros(4), spec("scad")) == 0.0
    assert penalty_value([0.5], spec("scad", a=3.7)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        penalty_value([1.0], PenaltySpec("garrote", 1.0, garrote_base=np.array([-1.0])))


@pytest.mark.parametrize("kind, a", [("scad", 3.7), ("mcp", 2.5)])
def test_folded_concave_values_match_quadrature(kind, a):
    lam = 1.3

    def deriv(t):
        if kind == "scad":
            return lam * np.where(t <= lam, 1.0, np.maximum(a * lam - t, 0) / ((a - 1) * lam))
        return np.maximum(lam - t / a, 0.0)

    for theta in [0.4, 1.3, 2.0, 4.0, 10.0]:
        t = np.linspace(0, theta, 200_001)
        quad = 2 * np.trapezoid(deriv(t), t)
        assert penalty_value([theta], spec(kind, lam, a=a)) == pytest.approx(quad, abs=1e-8)


@pytest.mark.parametrize(
    "kind, d, kw, bounds",
    [
        ("scad", 1.7, dict(lam=0.8, a=3.7), lambda d, kw: [(d + 1) * kw["lam"], kw["a"] * kw["lam"] * d]),
        ("mcp", 1.3, dict(lam=0.8, a=2.5), lambda d, kw: [kw["a"] * kw["lam"] * d]),
        ("berhu", 0.7, dict(lam=0.8, delta=0.6), lambda d, kw: [kw["lam"] + d * kw["delta"]]),
        ("lasso", 0.7, dict(lam=0.8), lambda d, kw: [kw["lam"]]),
    ],
)
def test_branch_boundaries_are_continuous(kind, d, kw, bounds):
    s = PenaltySpec(kind, **kw)
    for edge in bounds(d, kw):
        for sgn in (1.0, -1.0):
            lo = solve_scalar(d, sgn * edge * (1 - 1e-12), 0, s)
            at = solve_scalar(d, sgn * edge, 0, s)
            hi = solve_scalar(d, sgn * edge * (1 + 1e-12), 0, s)
            assert abs(lo - at) < 1e-9 and abs(hi - at) < 1e-9


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(["lasso", "elastic_net", "berhu"]),
    st.floats(0.1, 10),
    st.floats(0, 5),
    st.floats(-20, 20),
    st.floats(0, 5),
)
def test_convex_solutions_monotone_in_u(kind, d, lam, u, du):
    s = PenaltySpec(kind, lam, lam2=0.5, delta=0.8)
    assert solve_scalar(d, u + du, 0, s) >= solve_scalar(d, u, 0, s)


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(["none", "lasso", "elastic_net", "scad", "mcp", "berhu", "bridge"]),
    st.floats(1.0, 10),
    st.floats(0, 5),
    st.floats(-20, 20),
)
def test_solutions_are_odd_in_u(kind, d, lam, u):
    s = PenaltySpec(kind, lam, lam2=0.5)
    assert solve_scalar(d, -u, 0, s) == -solve_scalar(d, u, 0, s)


def test_threshold_vectorizes_solve_scalar():
    rng = np.random.default_rng(5)
    u = rng.uniform(-6, 6, 40)
    d = rng.uniform(1, 3, 40)
    for kind in ["lasso", "scad", "mcp", "bridge", "berhu"]:
        s = PenaltySpec(kind, 0.9)
        got = threshold(u, d, s)
        want = [solve_scalar(dj, uj, j, s) for j, (dj, uj) in enumerate(zip(d, u))]
        np.testing.assert_array_equal(got, want)


def test_bridge_safeguard_keeps_better_old_value():
    s = PenaltySpec("bridge", 1.0, a=0.5)
    u, d = 3.0, 1.0
    new = threshold(np.array([u]), np.array([d]), s)[0]
    # the previous value is retained only if it scores strictly better
    kept = threshold(np.array([u]), np.array([d]), s, beta_old=np.array([new + 0.5]))[0]
    assert kept == new
