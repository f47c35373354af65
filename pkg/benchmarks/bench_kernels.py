"""Time the compiled and numpy kernel backends on identical OEM fits.

Usage: python3 benchmarks/bench_kernels.py [--repeats 5]
"""
import argparse
import time

import numpy as np

from orthoem import PenaltySpec, SolverOptions, _backend, fit

CASES = [
    ("lasso", dict(lam=0.5), 200, 20),
    ("scad", dict(lam=0.5), 200, 20),
    ("bridge", dict(lam=0.5, a=0.5), 200, 20),
    ("lasso", dict(lam=0.5), 1000, 100),
    ("none", dict(), 1000, 100),
]


def problem(n, p, seed=0):
    rng = np.random.default_rng(seed)
    x = 0.9 * rng.standard_normal((n, p)) + 0.3 * rng.standard_normal((n, 1))
    beta = np.zeros(p)
    beta[:5] = [3, -2, 1.5, 1, -1]
    return x, x @ beta + rng.standard_normal(n)


def time_fit(x, y, spec, opts, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = fit(x, y, spec, opts)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    backends = _backend.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'penalty':8} {'n':>5} {'p':>4} {'iters':>6} " + " ".join(f"{b + ' ms':>11}" for b in backends) + "   speedup  max|diff|")
    opts = SolverOptions(tol=1e-8, standardize=True)
    for kind, kw, n, p in CASES:
        x, y = problem(n, p)
        spec = PenaltySpec(kind, **kw)
        times, betas, iters = [], [], 0
        for b in backends:
            prev = _backend.use_backend(b)
            try:
                t, res = time_fit(x, y, spec, opts, args.repeats)
            finally:
                _backend.use_backend(prev)
            times.append(t)
            betas.append(res.beta)
            iters = res.iterations
        diff = max(float(np.max(np.abs(b - betas[0]))) for b in betas)
        speed = times[-1] / times[0] if len(times) > 1 else 1.0
        print(f"{kind:8} {n:>5} {p:>4} {iters:>6} " + " ".join(f"{1e3 * t:>11.2f}" for t in times)
              + f"   {speed:7.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
