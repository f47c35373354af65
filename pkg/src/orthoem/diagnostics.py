"""Convergence-rate quantities, grouping-coherence checks and the Monte
Carlo harnesses for iteration counts and variable-selection accuracy.

Random streams
--------------
Every replication draws from its own ``numpy.random.PCG64`` generator
seeded with ``SeedSequence(seed, spawn_key=(i, r))`` where ``i`` indexes
the sample size in the grid and ``r`` the replication. Results are
therefore reproducible bit for bit from ``(seed, spec)`` and do not depend
on the order in which replications run.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .linalg import as_matrix, as_vector, pinv_least_squares, sym_eigen
from .orthogonalize import OrthoExpansion, expand
from .penalties import PenaltyKind, PenaltySpec
from .solver import SolverOptions, fit

ALIAS_ATOL = 1e-12


@dataclass
class CoherenceReport:
    aliased_pairs: list[tuple[int, int, int]]
    violations: list[tuple[int, int, int]]

    @property
    def coherent(self) -> bool:
        return not self.violations


def aliased_pairs(x, atol: float = ALIAS_ATOL) -> list[tuple[int, int, int]]:
    """All ``(i, j, sign)`` with ``i < j`` and ``x_i = sign * x_j`` entrywise."""
    x = as_matrix(x, "x")
    p = x.shape[1]
    pairs = []
    for i in range(p):
        same = np.max(np.abs(x[:, i + 1:] - x[:, [i]]), axis=0) <= atol
        flip = np.max(np.abs(x[:, i + 1:] + x[:, [i]]), axis=0) <= atol
        for off in np.flatnonzero(same | flip):
            j = i + 1 + int(off)
            pairs.append((i, j, 1 if same[off] else -1))
    return pairs


def check_coherence(x, beta, tol: float = 1e-8) -> CoherenceReport:
    """Check identical (negated) columns carry identical (negated) coefficients."""
    beta = as_vector(beta, "beta")
    pairs = aliased_pairs(x)
    bad = [(i, j, s) for i, j, s in pairs if abs(beta[i] - s * beta[j]) > tol]
    return CoherenceReport(aliased_pairs=pairs, violations=bad)


def rate_r0(expansion: OrthoExpansion, x) -> float:
    """Global convergence rate ``(d - gamma_p) / d`` of unpenalized OEM."""
    x = as_matrix(x, "x")
    s = expansion.s_diag
    z = x / s
    gamma_p = float(sym_eigen(z.T @ z).values[-1])
    r0 = (expansion.d_scalar - max(gamma_p, 0.0)) / expansion.d_scalar
    return float(min(max(r0, 0.0), 1.0))


def empirical_rate(path: np.ndarray, window: int = 10) -> float:
    """Median ratio ``||b_{k+1} - b*|| / ||b_k - b*||`` over the last iterations.

    ``b*`` is the final iterate, so the last step itself is excluded.
    Returns ``nan`` when fewer than two usable ratios exist.
    """
    path = np.asarray(path, dtype=float)
    if path.shape[0] < 3:
        return float("nan")
    dist = np.linalg.norm(path[:-1] - path[-1], axis=1)
    num, den = dist[1:], dist[:-1]
    ok = den > 0
    ratios = (num[ok] / den[ok])[-window:]
    return float(np.median(ratios)) if ratios.size else float("nan")


@dataclass
class RateReport:
    r0: float
    empirical_r: float
    iterations_ols: int
    iterations_penalized: int


def rate_report(x, y, spec: PenaltySpec, tol: float = 1e-6) -> RateReport:
    """Compare unpenalized and penalized OEM on the raw scale with ``S = I``."""
    opts = SolverOptions(tol=tol, standardize=False, record_trace=True)
    exp = expand(x)
    ols = fit(x, y, PenaltySpec("none"), opts, expansion=exp)
    pen = fit(x, y, spec, opts, expansion=exp if spec.kind not in (PenaltyKind.SCAD, PenaltyKind.MCP) else None)
    return RateReport(
        r0=rate_r0(exp, x),
        empirical_r=empirical_rate(pen.path),
        iterations_ols=ols.iterations,
        iterations_penalized=pen.iterations,
    )


def decaying_beta(p: int) -> np.ndarray:
    """Alternating, exponentially decaying coefficients ``(-1)^j exp(-(j-1)/10)``."""
    j = np.arange(1, p + 1)
    return (-1.0) ** j * np.exp(-2.0 * (j - 1) / 20.0)


def sparse_beta(p: int) -> np.ndarray:
    """Harness default for selection experiments: ``(3, 1.5, 2, 0, ..., 0)``."""
    b = np.zeros(p)
    head = np.array([3.0, 1.5, 2.0])[:p]
    b[: head.size] = head
    return b


@dataclass
class SimulationSpec:
    n: int = 100
    p: int = 10
    rho: float = 0.1
    sigma: float = 1.0
    beta_true: np.ndarray | None = None
    replications: int = 20
    seed: int = 0
    n_grid: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0 <= self.rho < 1:
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.replications < 1 or self.p < 1 or self.n < 1:
            raise DomainError("n, p and replications must be positive")
        if self.beta_true is not None:
            self.beta_true = as_vector(self.beta_true, "beta_true")
            if self.beta_true.shape[0] != self.p:
                raise DomainError(f"beta_true has length {self.beta_true.shape[0]}, need p={self.p}")

    def grid(self) -> tuple[int, ...]:
        return tuple(self.n_grid) if self.n_grid else (self.n,)


def replication_rng(seed: int, i_n: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i_n, rep))))


def equicorrelated_design(rng: np.random.Generator, n: int, p: int, rho: float) -> np.ndarray:
    """Rows iid ``N(0, V)`` with unit variances and all correlations ``rho``."""
    common = rng.standard_normal((n, 1))
    return np.sqrt(1.0 - rho) * rng.standard_normal((n, p)) + np.sqrt(rho) * common


def draw(spec: SimulationSpec, beta: np.ndarray, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    x = equicorrelated_design(rng, n, spec.p, spec.rho)
    y = x @ beta + spec.sigma * rng.standard_normal(n)
    return x, y


@dataclass
class IterationRow:
    n: int
    mean_r0: float
    mean_iter_ols: float
    mean_iter_lasso: float


def run_iteration_experiment(spec: SimulationSpec, lam: float, tol: float = 1e-6) -> list[IterationRow]:
    """Mean ``R0`` and OEM iteration counts for least squares and the lasso.

    ``lam`` is read on the per-observation scale of ``(1/2n)||Y - Xb||^2 +
    (lam/n) sum |b_j|``, the usual convention for this simulation design.
    Fits therefore use ``X / sqrt(n)`` and ``Y / sqrt(n)`` with ``S = I``
    (so ``X'X + A = d I``), start from zero and share one tolerance. ``R0``
    and the least-squares counts are unaffected by the rescaling.
    """
    beta = decaying_beta(spec.p) if spec.beta_true is None else spec.beta_true
    opts = SolverOptions(tol=tol, standardize=False)
    rows = []
    for i_n, n in enumerate(spec.grid()):
        r0 = np.empty(spec.replications)
        it_ols = np.empty(spec.replications)
        it_las = np.empty(spec.replications)
        for rep in range(spec.replications):
            x, y = draw(spec, beta, n, replication_rng(spec.seed, i_n, rep))
            x, y = x / np.sqrt(n), y / np.sqrt(n)
            exp = expand(x)
            r0[rep] = rate_r0(exp, x)
            it_ols[rep] = fit(x, y, PenaltySpec("none"), opts, expansion=exp).iterations
            it_las[rep] = fit(x, y, PenaltySpec("lasso", lam), opts, expansion=exp).iterations
        rows.append(IterationRow(n, float(r0.mean()), float(it_ols.mean()), float(it_las.mean())))
    return rows


@dataclass
class OracleRow:
    n: int
    lam: float
    support_recovery_rate: float
    rmse_on_support: float
    oracle_rmse: float
    mean_iterations: float = field(default=0.0)


def run_oracle_experiment(
    spec: SimulationSpec,
    penalty: str = "scad",
    a: float | None = None,
    lambda_exponent: float = 0.75,
    tol: float = 1e-6,
) -> list[OracleRow]:
    """Selection and estimation accuracy of SCAD/MCP fitted by OEM from OLS.

    The penalty level is ``lambda_n = n ** lambda_exponent`` in the scaling
    where ``X'X / n`` has unit diagonal. Each fit therefore uses the design
    and response divided by ``sqrt(n)``, standardized columns, and level
    ``lambda_n / n``. The oracle estimator is least squares on the true
    support; both RMSEs pool all replications and support coordinates.
    """
    kind = PenaltyKind(penalty)
    if kind not in (PenaltyKind.SCAD, PenaltyKind.MCP):
        raise DomainError("oracle experiment supports scad and mcp")
    if not 0.5 < lambda_exponent < 1:
        raise DomainError("lambda_exponent must lie in (0.5, 1)")
    beta = sparse_beta(spec.p) if spec.beta_true is None else spec.beta_true
    support = beta != 0
    opts = SolverOptions(tol=tol, init="ols", standardize=True)
    rows = []
    for i_n, n in enumerate(spec.grid()):
        if n <= spec.p:
            raise DomainError(f"oracle experiment needs n > p, got n={n}, p={spec.p}")
        lam = n**lambda_exponent / n
        pen = PenaltySpec(kind, lam, a=a)
        hits = 0
        err = []
        oracle_err = []
        iters = 0
        for rep in range(spec.replications):
            x, y = draw(spec, beta, n, replication_rng(spec.seed, i_n, rep))
            res = fit(x / np.sqrt(n), y / np.sqrt(n), pen, opts)
            iters += res.iterations
            hits += bool(np.array_equal(res.beta != 0, support))
            if support.any():
                err.append(res.beta[support] - beta[support])
                oracle = pinv_least_squares(x[:, support], y)
                oracle_err.append(oracle - beta[support])
        rmse = float(np.sqrt(np.mean(np.square(err)))) if err else 0.0
        ormse = float(np.sqrt(np.mean(np.square(oracle_err)))) if oracle_err else 0.0
        rows.append(OracleRow(n, lam, hits / spec.replications, rmse, ormse, iters / spec.replications))
    return rows


def long_format(experiment: str, rows) -> list[tuple[str, int, str, float]]:
    """Flatten result rows into ``(experiment, n, metric, value)`` records."""
    out = []
    for row in rows:
        for name, value in vars(row).items():
            if name != "n":
                out.append((experiment, row.n, name, float(value)))
    return out


def long_format_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "n", "metric", "value"])
    for exp_name, n, metric, value in records:
        w.writerow([exp_name, n, metric, repr(value)])
    return buf.getvalue()
