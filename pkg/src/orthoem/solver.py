"""The OEM iteration for penalized least squares.

Each iteration imputes the missing block of the orthogonal complete design
through ``u = X'Y + A beta`` and then solves the separable complete-data
problem coordinate by coordinate (see :mod:`orthoem.penalties`).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .exceptions import DomainError
from .linalg import as_matrix, as_vector, column_norms, pinv_least_squares
from .orthogonalize import OrthoExpansion, ScalingChoice, expand
from .penalties import NEEDS_UNIT_D, PenaltySpec, check_d, penalty_value, threshold


@dataclass
class SolverOptions:
    """Iteration controls.

    ``init`` is ``"zeros"``, ``"ols"`` or an explicit coefficient vector on
    the original data scale. ``groups > 1`` selects the hybrid scheme that
    cycles OEM over contiguous blocks of coefficients. With
    ``standardize`` the fit runs on unit-norm columns and the penalty level
    refers to that scale; coefficients are always reported on the original
    scale.
    """

    tol: float = 1e-6
    max_iter: int = 10_000
    init: str | np.ndarray = "zeros"
    accelerate: bool = False
    groups: int = 1
    record_trace: bool = False
    standardize: bool = True
    inflate: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.groups < 1:
            raise DomainError(f"groups must be >= 1, got {self.groups}")
        if self.inflate < 1:
            raise DomainError(f"inflate must be >= 1, got {self.inflate}")
        if isinstance(self.init, str) and self.init not in ("zeros", "ols"):
            raise DomainError(f"init must be 'zeros', 'ols' or a vector, got {self.init!r}")


@dataclass
class FitResult:
    beta: np.ndarray
    iterations: int
    converged: bool
    final_objective: float
    u_final: np.ndarray
    objective_trace: list[float] | None = None
    path: np.ndarray | None = None
    expansion: dict = field(default_factory=dict)
    elapsed: float = 0.0
    inner_iterations: int | None = None


def objective(x, y, beta, spec: PenaltySpec) -> float:
    """``||Y - X beta||^2 + P(beta)``."""
    x = as_matrix(x, "x")
    r = as_vector(y, "y") - x @ np.asarray(beta, dtype=float)
    return float(r @ r) + penalty_value(beta, spec)


def oem_step(u, expansion: OrthoExpansion, spec: PenaltySpec) -> np.ndarray:
    """One M-step: solve each coordinate's scalar problem at ``u``."""
    return threshold(u, expansion.d_diag, spec)


def find_aliases(x: np.ndarray):
    """Exactly aliased column pairs ``x_j = s * x_r`` (``r`` the first of its group).

    Returns index arrays ``rep``, ``other`` and the float array ``sign``.
    """
    groups: dict[bytes, tuple[int, float]] = {}
    rep, other, sign = [], [], []
    for j in range(x.shape[1]):
        col = x[:, j]
        nz = np.flatnonzero(col)
        s = -1.0 if nz.size and col[nz[0]] < 0 else 1.0
        key = (s * col + 0.0).tobytes()  # + 0.0 folds -0.0 into 0.0
        if key in groups:
            r, sr = groups[key]
            rep.append(r)
            other.append(j)
            sign.append(s * sr)
        else:
            groups[key] = (j, s)
    return (
        np.asarray(rep, dtype=np.intp),
        np.asarray(other, dtype=np.intp),
        np.asarray(sign, dtype=float),
    )


@dataclass
class _Problem:
    x: np.ndarray  # fitting-scale design
    y: np.ndarray
    scale: np.ndarray  # fitting coefficient = raw coefficient * scale
    spec: PenaltySpec  # spec on the fitting scale
    opts: SolverOptions

    def to_raw(self, b):
        return b / self.scale

    def to_fit(self, b):
        return b * self.scale


def _prepare(x, y, spec: PenaltySpec, opts: SolverOptions) -> _Problem:
    x = as_matrix(x, "x")
    y = as_vector(y, "y")
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
    if opts.standardize:
        scale = column_norms(x)
        zero = np.flatnonzero(scale == 0.0)
        if zero.size:
            raise ValueError(f"cannot standardize: column {zero[0]} is all zeros")
        xs = x / scale
    else:
        scale = np.ones(x.shape[1])
        xs = x
    spec.base_vector(x.shape[1])
    return _Problem(xs, y, scale, spec.rescaled_base(scale), opts)


def _expansion_for(xs, spec: PenaltySpec, opts: SolverOptions) -> OrthoExpansion:
    scaling = ScalingChoice.COLUMN_NORM if opts.standardize else ScalingChoice.IDENTITY
    min_d = 1.0 if spec.kind in NEEDS_UNIT_D else None
    return expand(xs, scaling=scaling, inflate=opts.inflate, min_d=min_d)


def _initial(prob: _Problem) -> np.ndarray:
    init = prob.opts.init
    p = prob.x.shape[1]
    if isinstance(init, str):
        if init == "zeros":
            return np.zeros(p)
        return pinv_least_squares(prob.x, prob.y)
    b = as_vector(init, "init")
    if b.shape != (p,):
        raise ValueError(f"init has length {b.shape[0]}, need {p}")
    return prob.to_fit(b)


def _safe_objective(x, y, b, spec) -> float:
    try:
        return objective(x, y, b, spec)
    except DomainError:
        return np.inf


def _accelerated(prob, xty, exp, beta0, aliases):
    """Squared-extrapolation OEM with a descent safeguard.

    The extrapolated point is kept only if it does no worse than two plain
    OEM steps, so the objective stays monotone.
    """
    k = _backend.kernels
    spec, opts = prob.spec, prob.opts
    params, base = spec.params(), spec.base_vector(exp.p)

    def step(b):
        return k.oem_step(xty, exp.a_matrix, exp.d_diag, b, spec.code, params, base, *aliases)[0]

    beta = beta0.copy()
    path = [beta.copy()] if opts.record_trace else None
    converged = False
    it = 0
    while it < opts.max_iter:
        it += 1
        m1 = step(beta)
        if k.rel_change(m1, beta) < opts.tol:
            beta = m1
            converged = True
        else:
            m2 = step(m1)
            r = m1 - beta
            v = m2 - m1 - r
            nv = np.linalg.norm(v)
            new = m2
            if nv > 0:
                g = -np.linalg.norm(r) / nv
                cand = beta - 2 * g * r + g * g * v
                if _safe_objective(prob.x, prob.y, cand, spec) <= _safe_objective(prob.x, prob.y, m2, spec):
                    new = cand
            converged = k.rel_change(new, beta) < opts.tol
            beta = new
        if path is not None:
            path.append(beta.copy())
        if converged:
            break
    return beta, it, converged, (np.array(path) if path is not None else None)


def _check_expansion(exp: OrthoExpansion, p: int) -> None:
    if exp.a_matrix.shape != (p, p) or exp.d_diag.shape != (p,):
        raise ValueError(f"expansion is for p={exp.p}, design has p={p}")


def fit(x, y, spec: PenaltySpec, opts: SolverOptions | None = None, expansion: OrthoExpansion | None = None) -> FitResult:
    """Fit a penalized least-squares model by OEM.

    Parameters
    ----------
    x : array_like, shape (n, p)
    y : array_like, shape (n,)
    spec : PenaltySpec
    opts : SolverOptions, optional
    expansion : OrthoExpansion, optional
        Precomputed orthogonalization of the fitting-scale design (the
        standardized one when ``opts.standardize``). Reused across a path.

    Returns
    -------
    FitResult
        Coefficients on the original scale. The objective values are those
        of the problem actually iterated, i.e. on the fitting scale.
    """
    opts = opts or SolverOptions()
    if opts.groups > 1:
        return fit_hybrid(x, y, spec, opts)
    t0 = time.perf_counter()
    prob = _prepare(x, y, spec, opts)
    p = prob.x.shape[1]
    exp = expansion if expansion is not None else _expansion_for(prob.x, prob.spec, opts)
    _check_expansion(exp, p)
    check_d(exp.d_diag, prob.spec)
    xty = prob.x.T @ prob.y
    beta0 = _initial(prob)
    aliases = find_aliases(prob.x)
    k = _backend.kernels
    fspec = prob.spec
    if opts.accelerate:
        beta, it, converged, path = _accelerated(prob, xty, exp, beta0, aliases)
    else:
        beta, _, it, converged, path = k.oem_run(
            xty, exp.a_matrix, exp.d_diag, beta0, fspec.code, fspec.params(),
            fspec.base_vector(p), *aliases, opts.tol, opts.max_iter, opts.record_trace,
        )
    u_final = k.compute_u(xty, exp.a_matrix, beta, *aliases)
    trace = None
    if path is not None:
        trace = [objective(prob.x, prob.y, b, fspec) for b in path]
        path = prob.to_raw(path)
    return FitResult(
        beta=prob.to_raw(beta),
        iterations=int(it),
        converged=bool(converged),
        final_objective=objective(prob.x, prob.y, beta, fspec),
        u_final=u_final,
        objective_trace=trace,
        path=path,
        expansion=exp.summary(),
        elapsed=time.perf_counter() - t0,
    )


def fit_hybrid(x, y, spec: PenaltySpec, opts: SolverOptions) -> FitResult:
    """Block-cyclic OEM: minimize over one contiguous coefficient group at a time.

    Each group's subproblem (its columns against the response with the
    other groups' fit removed) is solved by OEM to ``opts.tol`` from the
    current values. Sweeps stop when a full pass moves no coefficient by
    more than ``opts.tol`` (relative). ``groups == 1`` is plain :func:`fit`.
    """
    if opts.groups == 1:
        return fit(x, y, spec, opts)
    t0 = time.perf_counter()
    prob = _prepare(x, y, spec, opts)
    p = prob.x.shape[1]
    if opts.groups > p:
        raise DomainError(f"groups must be <= p={p}, got {opts.groups}")
    k = _backend.kernels
    fspec = prob.spec
    blocks = np.array_split(np.arange(p), opts.groups)
    subs = []
    for idx in blocks:
        xg = np.ascontiguousarray(prob.x[:, idx])
        gspec = fspec.subset(idx)
        exp = _expansion_for(xg, gspec, opts)
        check_d(exp.d_diag, gspec)
        subs.append((idx, xg, gspec, exp, find_aliases(xg)))

    beta = _initial(prob)
    record = opts.record_trace
    path = [beta.copy()] if record else None
    trace = [objective(prob.x, prob.y, beta, fspec)] if record else None
    converged = False
    inner = 0
    sweep = 0
    while sweep < opts.max_iter:
        sweep += 1
        old = beta.copy()
        fitted = prob.x @ beta
        for idx, xg, gspec, exp, aliases in subs:
            partial = prob.y - fitted + xg @ beta[idx]
            bg, _, it, _, _ = k.oem_run(
                xg.T @ partial, exp.a_matrix, exp.d_diag, beta[idx], gspec.code,
                gspec.params(), gspec.base_vector(idx.size), *aliases,
                opts.tol, opts.max_iter, False,
            )
            inner += it
            fitted = fitted + xg @ (bg - beta[idx])
            beta[idx] = bg
        if record:
            path.append(beta.copy())
            trace.append(objective(prob.x, prob.y, beta, fspec))
        if k.rel_change(beta, old) < opts.tol:
            converged = True
            break
    xty = prob.x.T @ prob.y
    full = _expansion_for(prob.x, fspec, opts)
    u_final = k.compute_u(xty, full.a_matrix, beta, *find_aliases(prob.x))
    return FitResult(
        beta=prob.to_raw(beta),
        iterations=sweep,
        converged=converged,
        final_objective=objective(prob.x, prob.y, beta, fspec),
        u_final=u_final,
        objective_trace=trace,
        path=None if path is None else prob.to_raw(np.array(path)),
        expansion=full.summary(),
        elapsed=time.perf_counter() - t0,
        inner_iterations=inner,
    )
