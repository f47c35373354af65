"""Active orthogonalization.

Given any regression matrix ``X`` this builds the pieces of an orthogonal
complete matrix ``Xc = (X; Delta)``: a column scaling ``S``, the top
eigenvalue ``gamma1`` of ``S^-1 X'X S^-1``, the scalar ``d >= gamma1``, the
complement ``A = Delta'Delta = d S^2 - X'X`` and the diagonal
``d_j = d s_j^2`` of ``Xc'Xc``. ``Delta`` itself is only materialized on
request since the solver needs ``A`` alone.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import ConvergenceError
from .linalg import TIE_RTOL, as_matrix, gram, multiplicity, power_method, sym_eigen


class ScalingChoice(str, Enum):
    IDENTITY = "identity"
    COLUMN_NORM = "column-norm"


@dataclass(frozen=True)
class OrthoExpansion:
    s_diag: np.ndarray
    gamma1: float
    d_scalar: float
    a_matrix: np.ndarray
    d_diag: np.ndarray
    delta: np.ndarray | None = None
    multiplicity_t: int | None = None

    @property
    def p(self) -> int:
        return self.s_diag.shape[0]

    def summary(self) -> dict:
        return {
            "gamma1": self.gamma1,
            "d": self.d_scalar,
            "t": self.multiplicity_t,
            "added_rows": None if self.delta is None else self.delta.shape[0],
        }


def scaling_diag(x: np.ndarray, scaling) -> np.ndarray:
    scaling = ScalingChoice(scaling)
    p = x.shape[1]
    if scaling is ScalingChoice.IDENTITY:
        return np.ones(p)
    s = np.sqrt(np.einsum("ij,ij->j", x, x))
    zero = np.flatnonzero(s == 0.0)
    if zero.size:
        raise ValueError(
            f"column-norm scaling needs nonzero columns; column {zero[0]} is zero"
        )
    return s


def gamma1_fast(x, scaling=ScalingChoice.IDENTITY, g: np.ndarray | None = None) -> float:
    """Top eigenvalue of the scaled Gram by power iteration.

    Falls back to a full eigendecomposition if power iteration stalls.
    """
    x = as_matrix(x, "x")
    s = scaling_diag(x, scaling)
    g = gram(x) if g is None else g
    z = g / np.outer(s, s)
    try:
        gamma, _ = power_method(z, tol=1e-12, max_iter=2_000)
    except ConvergenceError:
        gamma = float(sym_eigen(z).values[0])
    return gamma


def expand(
    x,
    scaling=ScalingChoice.IDENTITY,
    inflate: float = 1.0,
    want_delta: bool = False,
    min_d: float | None = None,
) -> OrthoExpansion:
    """Actively orthogonalize ``x``.

    Parameters
    ----------
    x : array_like, shape (n, p)
    scaling : ScalingChoice or str
        ``"identity"`` (S = I) or ``"column-norm"`` (S = diag of column norms).
    inflate : float
        ``d = inflate * gamma1``; values above 1 make ``A`` positive definite.
    want_delta : bool
        Also build ``Delta`` (needs the full eigendecomposition).
    min_d : float, optional
        Raise ``d`` further if needed so that every ``d_j >= min_d``.

    Returns
    -------
    OrthoExpansion
    """
    if inflate < 1.0:
        raise ValueError(f"inflate must be >= 1, got {inflate}")
    x = as_matrix(x, "x")
    s = scaling_diag(x, scaling)
    g = gram(x)
    outer = np.outer(s, s)

    if want_delta:
        eig = sym_eigen(g / outer)
        gamma1 = float(eig.values[0])
        t = multiplicity(eig.values)
    else:
        eig = None
        gamma1 = gamma1_fast(x, scaling, g=g)
        t = None

    d = inflate * gamma1
    if min_d is not None and d * np.min(s**2) < min_d:
        d = min_d / np.min(s**2)

    a = d * np.diag(s**2) - g
    a = 0.5 * (a + a.T)
    delta = None
    if eig is not None:
        # rows for every eigenvalue strictly below d; with d = gamma1 these
        # are exactly the ones below the tied top group
        gaps = d - eig.values
        keep = gaps > TIE_RTOL * max(abs(d), np.finfo(float).tiny)
        if d == gamma1:
            keep[:t] = False
        delta = (np.sqrt(gaps[keep])[:, None] * eig.vectors[:, keep].T) * s[None, :]
    return OrthoExpansion(
        s_diag=s,
        gamma1=gamma1,
        d_scalar=float(d),
        a_matrix=a,
        d_diag=d * s**2,
        delta=delta,
        multiplicity_t=t,
    )
