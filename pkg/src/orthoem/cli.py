"""Command-line entry point: ``orthoem <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence
under ``--strict``.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .data import (
    PathRequest,
    format_fit,
    format_path,
    load_dataset,
    load_matrix,
    run_path,
)
from .diagnostics import (
    SimulationSpec,
    check_coherence,
    long_format,
    long_format_csv,
    run_iteration_experiment,
    run_oracle_experiment,
)
from .exceptions import ConvergenceError, DataError, DomainError, OEMError
from .linalg import pinv_least_squares
from .orthogonalize import ScalingChoice, expand
from .penalties import PenaltyKind, PenaltySpec
from .solver import SolverOptions, fit

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_data(p, response_required=True):
    p.add_argument("data", help="comma-separated file with a header row")
    p.add_argument("--response", required=response_required, help="name of the response column")


def _add_penalty(p, default_kind="lasso"):
    p.add_argument("--penalty", default=default_kind, choices=[k.value for k in PenaltyKind])
    p.add_argument("--lambda", "--lam", dest="lam", type=float, default=0.0)
    p.add_argument("--lambda2", "--lam2", dest="lam2", type=float, default=0.0)
    p.add_argument("--a", type=float, default=None, help="SCAD/MCP shape or bridge exponent")
    p.add_argument("--delta", type=float, default=1.0, help="Berhu switch point")


def _add_options(p):
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--init", default="zeros", help="zeros, ols or comma-separated coefficients")
    p.add_argument("--accelerate", action="store_true")
    p.add_argument("--groups", type=int, default=1)
    p.add_argument("--record-trace", action="store_true")
    p.add_argument("--no-standardize", dest="standardize", action="store_false")
    p.add_argument("--inflate", type=float, default=1.0)
    p.add_argument("--strict", action="store_true", help="exit 3 if any fit does not converge")
    p.add_argument("--out", help="write the report here instead of stdout")


def _add_sim(p, n_grid, reps, sigma=1.0):
    p.add_argument("--n-grid", type=_ints, default=n_grid)
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--rho", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=sigma)
    p.add_argument("--replications", type=int, default=reps)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orthoem", description="Penalized least squares by orthogonalizing EM.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one penalized model")
    _add_data(p)
    _add_penalty(p)
    _add_options(p)

    p = sub.add_parser("path", help="fit along a descending lambda sequence")
    _add_data(p)
    _add_penalty(p)
    _add_options(p)
    p.add_argument("--lambdas", type=_floats, required=True, help="strictly descending, comma-separated")
    p.add_argument("--no-warm-start", dest="warm_start", action="store_false")

    p = sub.add_parser("orthogonalize", help="print gamma1, d, t, A and Delta for a design")
    _add_data(p, response_required=False)
    p.add_argument("--scaling", default="identity", choices=[s.value for s in ScalingChoice])
    p.add_argument("--inflate", type=float, default=1.0)
    p.add_argument("--out")

    p = sub.add_parser("bench-iterations", help="iteration counts versus n (OLS and lasso)")
    _add_sim(p, [100, 400, 1600, 6400], 20)
    p.add_argument("--lambda", "--lam", dest="lam", type=float, default=0.5)

    p = sub.add_parser("bench-oracle", help="SCAD/MCP support recovery versus n")
    _add_sim(p, [200, 800, 3200], 200)
    p.add_argument("--penalty", default="scad", choices=["scad", "mcp"])
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--lambda-exponent", type=float, default=0.75)

    p = sub.add_parser("coherence", help="check grouping coherence of a coefficient vector")
    _add_data(p)
    p.add_argument("--beta", type=_floats, help="coefficients; fitted from the penalty flags if omitted")
    p.add_argument("--coherence-tol", type=float, default=1e-8)
    _add_penalty(p)
    _add_options(p)
    return parser


def _options(args) -> SolverOptions:
    init = args.init
    if init not in ("zeros", "ols"):
        try:
            init = np.array(_floats(init))
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    return SolverOptions(
        tol=args.tol, max_iter=args.max_iter, init=init, accelerate=args.accelerate,
        groups=args.groups, record_trace=args.record_trace,
        standardize=args.standardize, inflate=args.inflate,
    )


def _spec(args, x, y) -> PenaltySpec:
    base = None
    if args.penalty == PenaltyKind.GARROTE.value:
        base = pinv_least_squares(x, y)
    return PenaltySpec(args.penalty, args.lam, args.lam2, args.a, args.delta, base)


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _echo(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


PENALTY_KEYS = ("penalty", "lam", "lam2", "a", "delta")
OPTION_KEYS = ("tol", "max_iter", "init", "accelerate", "groups", "standardize", "inflate")


def cmd_fit(args) -> int:
    ds = load_dataset(args.data, args.response)
    res = fit(ds.x, ds.y, _spec(args, ds.x, ds.y), _options(args))
    head = {"command": "fit", "data": args.data, "response": args.response, "n": ds.n, "p": ds.p}
    head.update(_echo(args, PENALTY_KEYS + OPTION_KEYS))
    _emit(format_fit(res, ds.column_names, head), args.out)
    return EXIT_NUMERIC if args.strict and not res.converged else EXIT_OK


def cmd_path(args) -> int:
    ds = load_dataset(args.data, args.response)
    spec = _spec(args, ds.x, ds.y)
    req = PathRequest(args.lambdas, spec, _options(args), args.warm_start)
    points = run_path(ds, req)
    head = {"command": "path", "data": args.data, "response": args.response, "n": ds.n, "p": ds.p}
    head.update(_echo(args, PENALTY_KEYS[:1] + PENALTY_KEYS[2:] + OPTION_KEYS + ("warm_start",)))
    head["lambdas"] = ", ".join(repr(v) for v in req.lambdas)
    _emit(format_path(points, ds.column_names, head), args.out)
    bad = any(pt.fit is None or not pt.fit.converged for pt in points)
    return EXIT_NUMERIC if args.strict and bad else EXIT_OK


def _block(name, m) -> list[str]:
    rows = np.atleast_2d(m)
    return [f"{name}:"] + ["  " + ", ".join(repr(float(v) + 0.0) for v in r) for r in rows]


def cmd_orthogonalize(args) -> int:
    if args.response:
        ds = load_dataset(args.data, args.response)
        x = ds.x
    else:
        x, _ = load_matrix(args.data)
    exp = expand(x, scaling=args.scaling, inflate=args.inflate, want_delta=True)
    lines = [
        "command: orthogonalize",
        f"data: {args.data}",
        f"scaling: {args.scaling}",
        f"gamma1: {exp.gamma1!r}",
        f"d: {exp.d_scalar!r}",
        f"t: {exp.multiplicity_t}",
        f"added_rows: {exp.delta.shape[0]}",
    ]
    lines += _block("s", exp.s_diag)
    lines += _block("A", exp.a_matrix)
    if exp.delta.shape[0]:
        lines += _block("Delta", exp.delta)
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _sim(args) -> SimulationSpec:
    return SimulationSpec(
        n=args.n_grid[0], p=args.p, rho=args.rho, sigma=args.sigma,
        replications=args.replications, seed=args.seed, n_grid=tuple(args.n_grid),
    )


def cmd_bench_iterations(args) -> int:
    rows = run_iteration_experiment(_sim(args), args.lam, tol=args.tol)
    _emit(long_format_csv(long_format("iterations", rows)), args.out)
    return EXIT_OK


def cmd_bench_oracle(args) -> int:
    rows = run_oracle_experiment(_sim(args), args.penalty, args.a, args.lambda_exponent, tol=args.tol)
    _emit(long_format_csv(long_format(f"oracle_{args.penalty}", rows)), args.out)
    return EXIT_OK


def cmd_coherence(args) -> int:
    ds = load_dataset(args.data, args.response)
    converged = True
    if args.beta is None:
        res = fit(ds.x, ds.y, _spec(args, ds.x, ds.y), _options(args))
        beta, converged = res.beta, res.converged
    else:
        beta = np.array(args.beta)
        if beta.shape[0] != ds.p:
            raise UsageError(f"--beta has {beta.shape[0]} entries, data has p={ds.p}")
    rep = check_coherence(ds.x, beta, tol=args.coherence_tol)
    lines = [
        "command: coherence",
        f"coherent: {'true' if rep.coherent else 'false'}",
        f"aliased_pairs: {len(rep.aliased_pairs)}",
    ]
    names = ds.column_names
    for i, j, s in rep.aliased_pairs:
        lines.append(f"  {names[i]} {'=' if s > 0 else '= -'} {names[j]}")
    lines.append(f"violations: {len(rep.violations)}")
    for i, j, s in rep.violations:
        lines.append(f"  {names[i]}: {beta[i]!r}  {names[j]}: {beta[j]!r}")
    lines += ["coefficients:"] + [f"  {n}: {float(b)!r}" for n, b in zip(names, beta)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_NUMERIC if args.strict and not converged else EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "path": cmd_path,
    "orthogonalize": cmd_orthogonalize,
    "bench-iterations": cmd_bench_iterations,
    "bench-oracle": cmd_bench_oracle,
    "coherence": cmd_coherence,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"orthoem: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DomainError, UsageError) as exc:
        print(f"orthoem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"orthoem: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OEMError, ValueError) as exc:
        # shape mismatches and degenerate designs surface as ValueError
        print(f"orthoem: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
