"""Penalty descriptors and their one-dimensional penalized-quadratic solvers.

Every penalty enters the objective as ``||Y - X b||^2 + P(b)`` with a
separable ``P(b) = sum_j P_j(b_j)``. The OEM M-step then reduces to
minimizing ``d b^2 - 2 u b + P_j(b)`` one coordinate at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _backend, _pykernels
from .exceptions import DomainError


class PenaltyKind(str, Enum):
    NONE = "none"
    LASSO = "lasso"
    ELASTIC_NET = "elastic_net"
    SCAD = "scad"
    MCP = "mcp"
    GARROTE = "garrote"
    BERHU = "berhu"
    BRIDGE = "bridge"


KIND_CODES = {
    PenaltyKind.NONE: _pykernels.NONE,
    PenaltyKind.LASSO: _pykernels.LASSO,
    PenaltyKind.ELASTIC_NET: _pykernels.ELASTIC_NET,
    PenaltyKind.SCAD: _pykernels.SCAD,
    PenaltyKind.MCP: _pykernels.MCP,
    PenaltyKind.GARROTE: _pykernels.GARROTE,
    PenaltyKind.BERHU: _pykernels.BERHU,
    PenaltyKind.BRIDGE: _pykernels.BRIDGE,
}

DEFAULT_A = {PenaltyKind.SCAD: 3.7, PenaltyKind.MCP: 2.5, PenaltyKind.BRIDGE: 0.5}

# closed forms for these kinds assume d_j >= 1
NEEDS_UNIT_D = frozenset({PenaltyKind.SCAD, PenaltyKind.MCP})
# kinds whose scalar solution is odd in u (needed for grouping coherence)
ODD_KINDS = frozenset(
    {
        PenaltyKind.NONE,
        PenaltyKind.LASSO,
        PenaltyKind.ELASTIC_NET,
        PenaltyKind.SCAD,
        PenaltyKind.MCP,
        PenaltyKind.BERHU,
        PenaltyKind.BRIDGE,
    }
)


@dataclass(frozen=True)
class PenaltySpec:
    """Tagged penalty with its tuning parameters.

    ``lam`` is the lasso-type level (``lambda_1`` for the elastic net),
    ``lam2`` the ridge part of the elastic net, ``a`` the SCAD/MCP shape or
    the bridge exponent, ``delta`` the Berhu switch point and
    ``garrote_base`` the least-squares coefficients scaling the garrote.
    """

    kind: PenaltyKind
    lam: float = 0.0
    lam2: float = 0.0
    a: float | None = None
    delta: float = 1.0
    garrote_base: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        kind = PenaltyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.a is None and kind in DEFAULT_A:
            object.__setattr__(self, "a", DEFAULT_A[kind])
        for name in ("lam", "lam2", "delta"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.lam < 0 or self.lam2 < 0:
            raise DomainError("lam and lam2 must be nonnegative")
        if kind is PenaltyKind.SCAD and not self.a > 2:
            raise DomainError(f"scad needs a > 2, got {self.a}")
        if kind is PenaltyKind.MCP and not self.a > 1:
            raise DomainError(f"mcp needs a > 1, got {self.a}")
        if kind is PenaltyKind.BRIDGE and not 0 < self.a < 1:
            raise DomainError(f"bridge needs 0 < a < 1, got {self.a}")
        if kind is PenaltyKind.BERHU and not self.delta > 0:
            raise DomainError(f"berhu needs delta > 0, got {self.delta}")
        if kind is PenaltyKind.GARROTE:
            if self.garrote_base is None:
                raise DomainError("garrote needs garrote_base (least-squares coefficients)")
            base = np.asarray(self.garrote_base, dtype=float).ravel()
            if not np.all(np.isfinite(base)) or np.any(base == 0.0):
                raise DomainError("garrote_base entries must be finite and nonzero")
            object.__setattr__(self, "garrote_base", base)

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    def params(self) -> np.ndarray:
        return np.array([self.lam, self.lam2, self.a if self.a is not None else 0.0, self.delta])

    def base_vector(self, p: int) -> np.ndarray:
        if self.kind is PenaltyKind.GARROTE:
            if self.garrote_base.shape[0] != p:
                raise DomainError(f"garrote_base has length {self.garrote_base.shape[0]}, need {p}")
            return self.garrote_base
        return np.ones(p)

    def with_lambda(self, lam: float) -> "PenaltySpec":
        return PenaltySpec(self.kind, lam, self.lam2, self.a, self.delta, self.garrote_base)

    def rescaled_base(self, scale: np.ndarray) -> "PenaltySpec":
        """Spec for coefficients expressed as ``b * scale`` (garrote only)."""
        if self.kind is not PenaltyKind.GARROTE:
            return self
        return PenaltySpec(self.kind, self.lam, self.lam2, self.a, self.delta, self.garrote_base * scale)

    def subset(self, idx) -> "PenaltySpec":
        if self.kind is not PenaltyKind.GARROTE:
            return self
        return PenaltySpec(self.kind, self.lam, self.lam2, self.a, self.delta, self.garrote_base[idx])


def check_d(d, spec: PenaltySpec) -> None:
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise DomainError("d must be positive")
    if spec.kind in NEEDS_UNIT_D and np.any(d < 1.0):
        raise DomainError(f"{spec.kind.value} closed form needs d >= 1, got min d = {d.min()}")


def solve_scalar(d: float, u: float, j: int, spec: PenaltySpec) -> float:
    """Minimize ``d b^2 - 2 u b + P_j(b)`` over the feasible set of ``b``.

    ``j`` selects the garrote baseline coefficient; other kinds ignore it.
    """
    check_d(d, spec)
    base = spec.garrote_base[j] if spec.kind is PenaltyKind.GARROTE else 1.0
    out = _backend.kernels.threshold(
        spec.code, np.array([float(u)]), np.array([float(d)]), spec.params(), np.array([base])
    )
    return float(out[0])


def threshold(u, d, spec: PenaltySpec, beta_old=None) -> np.ndarray:
    """Vectorized :func:`solve_scalar` over all coordinates."""
    u = np.asarray(u, dtype=float)
    d = np.broadcast_to(np.asarray(d, dtype=float), u.shape)
    check_d(d, spec)
    return _backend.kernels.threshold(
        spec.code, u, np.ascontiguousarray(d), spec.params(), spec.base_vector(u.shape[0]), beta_old
    )


def _scad_integral(theta, lam, a):
    return np.where(
        theta <= lam,
        lam * theta,
        np.where(
            theta <= a * lam,
            (2 * a * lam * theta - theta**2 - lam**2) / (2 * (a - 1)),
            (a + 1) * lam**2 / 2,
        ),
    )


def _mcp_integral(theta, lam, a):
    return np.where(theta <= a * lam, lam * theta - theta**2 / (2 * a), a * lam**2 / 2)


def penalty_terms(beta, spec: PenaltySpec) -> np.ndarray:
    """Per-coordinate penalty contributions ``P_j(b_j)``."""
    b = np.asarray(beta, dtype=float)
    ab = np.abs(b)
    lam = spec.lam
    kind = spec.kind
    if kind is PenaltyKind.NONE:
        return np.zeros_like(b)
    if kind is PenaltyKind.LASSO:
        return 2 * lam * ab
    if kind is PenaltyKind.ELASTIC_NET:
        return 2 * lam * ab + spec.lam2 * b * b
    if kind is PenaltyKind.SCAD:
        return 2 * _scad_integral(ab, lam, spec.a)
    if kind is PenaltyKind.MCP:
        return 2 * _mcp_integral(ab, lam, spec.a)
    if kind is PenaltyKind.GARROTE:
        base = spec.base_vector(b.shape[0])
        if np.any(b * base < 0):
            bad = int(np.flatnonzero(b * base < 0)[0])
            raise DomainError(f"garrote infeasible: coefficient {bad} has the wrong sign")
        return 2 * lam * b / base
    if kind is PenaltyKind.BERHU:
        delta = spec.delta
        return 2 * lam * np.where(ab < delta, ab, (b * b + delta * delta) / (2 * delta))
    if kind is PenaltyKind.BRIDGE:
        return lam * ab**spec.a
    raise DomainError(f"unknown penalty {kind}")


def penalty_value(beta, spec: PenaltySpec) -> float:
    return float(np.sum(penalty_terms(beta, spec)))
