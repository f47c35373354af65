"""Dataset ingestion, column standardization, lambda paths and text reports."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DataError, DomainError, OEMError
from .linalg import column_norms
from .orthogonalize import OrthoExpansion
from .solver import FitResult, SolverOptions, _expansion_for, _prepare, fit
from .penalties import PenaltySpec


@dataclass
class Dataset:
    """Design ``x`` (n, p), response ``y`` (n,) and per-column scale factors.

    ``scale[j]`` is the factor the original column was divided by, so the
    original design is ``x * scale``. A freshly loaded dataset has unit
    scales.
    """

    x: np.ndarray
    y: np.ndarray
    column_names: list[str]
    scale: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.x.ndim != 2:
            raise DataError(f"x must be 2-D, got shape {self.x.shape}")
        if self.y.shape[0] != self.x.shape[0]:
            raise DataError(f"y has {self.y.shape[0]} entries but x has {self.x.shape[0]} rows")
        if len(self.column_names) != self.x.shape[1]:
            raise DataError("column_names does not match the number of columns")
        if self.scale is None:
            self.scale = np.ones(self.x.shape[1])

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def unstandardized_x(self) -> np.ndarray:
        return self.x * self.scale


def _parse_cell(text: str, row: int, col: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {col!r}: non-numeric value {text!r}") from None
    if not math.isfinite(v):
        raise DataError(f"row {row}, column {col!r}: non-finite value {text!r}")
    return v


def _read_table(path) -> tuple[list[str], np.ndarray]:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        rows = []
        for k, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}: row {k} has {len(rec)} fields, header has {len(header)}")
            rows.append([_parse_cell(c.strip(), k, header[i]) for i, c in enumerate(rec)])
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, np.array(rows)


def load_dataset(path, response: str) -> Dataset:
    """Read a comma-separated file with a header row.

    The ``response`` column becomes ``y``; every other column, in header
    order, becomes a column of ``x``. Row numbers in error messages count
    the header as row 1.
    """
    header, arr = _read_table(path)
    if response not in header:
        raise DataError(f"{path}: response column {response!r} not found in header {header}")
    if len(header) < 2:
        raise DataError(f"{path}: no predictor columns besides {response!r}")
    iy = header.index(response)
    names = [h for i, h in enumerate(header) if i != iy]
    return Dataset(np.delete(arr, iy, axis=1), arr[:, iy], names)


def load_matrix(path) -> tuple[np.ndarray, list[str]]:
    """Read a headed comma-separated file as a plain matrix."""
    header, arr = _read_table(path)
    return arr, header


def standardize(ds: Dataset) -> Dataset:
    """Scale every column to unit sum of squares; the factors are recorded."""
    norms = column_norms(ds.x)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DataError(f"cannot standardize: column {ds.column_names[zero[0]]!r} is all zeros")
    return Dataset(ds.x / norms, ds.y.copy(), list(ds.column_names), ds.scale * norms)


@dataclass
class PathRequest:
    lambdas: tuple[float, ...]
    spec: PenaltySpec
    options: SolverOptions = field(default_factory=SolverOptions)
    warm_start: bool = True

    def __post_init__(self):
        lams = tuple(float(v) for v in self.lambdas)
        if not lams:
            raise DomainError("lambdas must not be empty")
        if any(not (v > 0 and math.isfinite(v)) for v in lams):
            raise DomainError("lambdas must be positive and finite")
        if any(b >= a for a, b in zip(lams, lams[1:])):
            raise DomainError("lambdas must be strictly descending")
        self.lambdas = lams


@dataclass
class PathPoint:
    lam: float
    fit: FitResult | None
    error: str | None = None


def run_path(ds: Dataset, req: PathRequest) -> list[PathPoint]:
    """Fit along ``req.lambdas``, sharing one orthogonalization.

    A failure at one lambda is recorded in that point's ``error`` and the
    sweep continues; the next warm start then falls back to the last
    successful solution.
    """
    opts = req.options
    prob = _prepare(ds.x, ds.y, req.spec, opts)
    exp: OrthoExpansion = _expansion_for(prob.x, prob.spec, opts)
    out = []
    prev = None
    for lam in req.lambdas:
        o = replace(opts, init=prev) if (req.warm_start and prev is not None) else opts
        try:
            res = fit(ds.x, ds.y, req.spec.with_lambda(lam), o, expansion=exp)
        except (OEMError, ValueError, ArithmeticError) as exc:
            out.append(PathPoint(lam, None, str(exc)))
            continue
        out.append(PathPoint(lam, res))
        prev = res.beta
    return out


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return "none"
    return str(v)


def format_fit(res: FitResult, names, header: dict | None = None) -> str:
    """Key:value report with a coefficient block, one ``name: value`` per line."""
    lines = [f"{k}: {_fmt(v)}" for k, v in (header or {}).items()]
    for k in ("gamma1", "d", "t"):
        lines.append(f"{k}: {_fmt(res.expansion.get(k))}")
    lines += [
        f"iterations: {res.iterations}",
        f"converged: {_fmt(res.converged)}",
        f"objective: {_fmt(res.final_objective)}",
        "coefficients:",
    ]
    lines += [f"  {n}: {_fmt(b)}" for n, b in zip(names, res.beta)]
    return "\n".join(lines) + "\n"


def format_path(points: list[PathPoint], names, header: dict | None = None) -> str:
    blocks = ["\n".join(f"{k}: {_fmt(v)}" for k, v in (header or {}).items())]
    for pt in points:
        head = {"lambda": pt.lam}
        if pt.fit is None:
            blocks.append(f"lambda: {_fmt(pt.lam)}\nerror: {pt.error}")
        else:
            blocks.append(format_fit(pt.fit, names, head).rstrip("\n"))
    return "\n---\n".join(b for b in blocks if b) + "\n"
