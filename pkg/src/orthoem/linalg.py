"""Dense matrix primitives: Gram products, power iteration, eigendecomposition
and the minimum-norm least-squares solution."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError

# eigenvalues this close (relative to the largest) count as tied
TIE_RTOL = 1e-9
# singular values below this fraction of the largest are treated as zero
PINV_RCOND = 1e-12


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite, non-empty 2-D float array."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


@dataclass(frozen=True)
class EigenResult:
    """Eigenpairs of a symmetric matrix.

    ``vectors[:, k]`` is the unit eigenvector for ``values[k]`` and the
    values are sorted in descending order.
    """

    values: np.ndarray
    vectors: np.ndarray


def column_norms(m) -> np.ndarray:
    m = as_matrix(m)
    return np.sqrt(np.einsum("ij,ij->j", m, m))


def gram(m) -> np.ndarray:
    """Return ``m' m``, symmetrized to remove rounding asymmetry."""
    m = as_matrix(m)
    g = m.T @ m
    return 0.5 * (g + g.T)


def default_init(p: int) -> np.ndarray:
    # all-ones plus an index-dependent perturbation; deterministic and
    # almost never orthogonal to the dominant eigenspace
    return np.ones(p) + 1e-3 * np.arange(1, p + 1) / p


def power_method(g, init=None, tol: float = 1e-10, max_iter: int = 10_000):
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Parameters
    ----------
    g : array_like, shape (p, p)
        Symmetric positive semi-definite matrix.
    init : array_like, optional
        Nonzero starting vector. Defaults to :func:`default_init`.
    tol : float
        Stop once the Rayleigh quotient changes by less than ``tol``
        relative, or the eigen-residual falls below ``tol`` relative.
    max_iter : int
        Iteration budget.

    Returns
    -------
    gamma1 : float
    iterations : int

    Raises
    ------
    ConvergenceError
        If the budget is exhausted; ``exc.estimate`` carries the last value.
    """
    g = as_matrix(g, "g")
    p = g.shape[0]
    if g.shape != (p, p):
        raise ValueError(f"g must be square, got {g.shape}")
    x = default_init(p) if init is None else as_vector(init, "init")
    if x.shape != (p,):
        raise ValueError("init does not conform to g")
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError("power method needs a nonzero initial vector")
    x = x / nrm
    gamma = None
    for it in range(1, max_iter + 1):
        y = g @ x
        new = float(x @ y)
        resid = np.linalg.norm(y - new * x)
        scale = max(abs(new), np.finfo(float).tiny)
        if resid <= tol * scale or (gamma is not None and abs(new - gamma) <= tol * scale):
            return new, it
        gamma = new
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, it
        x = y / ny
    raise ConvergenceError(
        f"power method did not converge in {max_iter} iterations", estimate=gamma
    )


def sym_eigen(g) -> EigenResult:
    """Full eigendecomposition of a symmetric matrix, values descending."""
    g = as_matrix(g, "g")
    if g.shape[0] != g.shape[1]:
        raise ValueError(f"g must be square, got {g.shape}")
    try:
        w, v = np.linalg.eigh(0.5 * (g + g.T))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(w)[::-1]
    return EigenResult(values=w[order], vectors=v[:, order])


def multiplicity(values: np.ndarray, rtol: float = TIE_RTOL) -> int:
    """Number of eigenvalues tied with the largest one."""
    top = values[0]
    return int(np.sum(values >= top - rtol * abs(top)))


def pinv_least_squares(x, y) -> np.ndarray:
    """Minimum-norm least-squares solution ``(X'X)^+ X'Y`` via the SVD."""
    x = as_matrix(x, "x")
    y = as_vector(y, "y")
    if y.shape[0] != x.shape[0]:
        raise ValueError("x and y do not conform")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(x.shape[1])
    keep = s > PINV_RCOND * s[0]
    coef = (u[:, keep].T @ y) / s[keep]
    return vt[keep].T @ coef
