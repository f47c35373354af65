"""Pure numpy OEM kernels.

Reference implementation of the hot loop; ``_ckernels.pyx`` mirrors every
function here with the same signature. Penalty parameters travel as a
float array ``params = [lam, lam2, a, delta]`` and ``base`` holds the
garrote baseline (ignored by other kinds). Kind codes are listed below.
"""
import numpy as np

NONE, LASSO, ELASTIC_NET, SCAD, MCP, GARROTE, BERHU, BRIDGE = range(8)

BISECT_STEPS = 80


def _soft(u, lam):
    return np.sign(u) * np.maximum(np.abs(u) - lam, 0.0)


def _bridge_obj(b, u, d, lam, a):
    return d * b * b - 2.0 * u * b + lam * np.abs(b) ** a


def _bridge(u, d, lam, a):
    au = np.abs(u)
    if lam == 0.0:
        return u / d
    hi = au / d
    # g'(b) = 2db - 2|u| + lam*a*b^(a-1) is decreasing below bm, increasing above
    bm = (lam * a * (1.0 - a) / (2.0 * d)) ** (1.0 / (2.0 - a))
    with np.errstate(divide="ignore", invalid="ignore"):
        gm = 2.0 * d * bm - 2.0 * au + lam * a * bm ** (a - 1.0)
    cand = (au > 0.0) & (bm < hi) & (gm < 0.0)
    lo = np.where(cand, bm, 0.0)
    up = np.where(cand, hi, 0.0)
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + up)
        with np.errstate(divide="ignore", invalid="ignore"):
            gp = 2.0 * d * mid - 2.0 * au + lam * a * mid ** (a - 1.0)
        pos = gp > 0.0
        up = np.where(cand & pos, mid, up)
        lo = np.where(cand & ~pos, mid, lo)
    b = 0.5 * (lo + up)
    better = cand & (_bridge_obj(b, au, d, lam, a) < 0.0)
    return np.where(better, np.sign(u) * b, 0.0)


def threshold(kind, u, d, params, base, beta_old=None):
    """Per-coordinate minimizer of ``d b^2 - 2 u b + P(b)``.

    ``beta_old`` is only consulted for the bridge penalty, where a
    coordinate keeps its old value unless the search strictly improves
    the scalar objective.
    """
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    lam, lam2, a, delta = (float(v) for v in params)
    if kind == NONE:
        return u / d
    if kind == LASSO:
        return _soft(u, lam) / d
    if kind == ELASTIC_NET:
        return _soft(u, lam) / (d + lam2)
    au = np.abs(u)
    if kind == SCAD:
        first = _soft(u, lam) / d
        mid = np.sign(u) * ((a - 1.0) * au - a * lam) / ((a - 1.0) * d - 1.0)
        return np.where(au <= (d + 1.0) * lam, first, np.where(au <= a * lam * d, mid, u / d))
    if kind == MCP:
        inner = np.sign(u) * a * np.maximum(au - lam, 0.0) / (a * d - 1.0)
        return np.where(au <= a * lam * d, inner, u / d)
    if kind == GARROTE:
        base = np.asarray(base, dtype=float)
        return np.maximum((u * base - lam) / (d * base * base), 0.0) * base
    if kind == BERHU:
        return np.where(
            au < lam + d * delta, _soft(u, lam) / d, u * delta / (lam + d * delta)
        )
    if kind == BRIDGE:
        new = _bridge(u, d, lam, a)
        if beta_old is None:
            return new
        old = np.asarray(beta_old, dtype=float)
        keep = _bridge_obj(new, u, d, lam, a) > _bridge_obj(old, u, d, lam, a)
        return np.where(keep, old, new)
    raise ValueError(f"unknown penalty kind code {kind}")


def compute_u(xty, a_mat, beta, rep, other, sign):
    """``u = X'Y + A beta`` with aliased coordinates made exactly symmetric.

    For aliased columns ``x_j = s x_r`` and coherent coefficients
    ``b_j = s b_r`` the identity ``u_j = s u_r`` holds exactly; rounding in
    the matrix product can break it, so it is imposed directly.
    """
    u = xty + a_mat @ beta
    if rep.size:
        hit = beta[other] == sign * beta[rep]
        u[other[hit]] = sign[hit] * u[rep[hit]]
    return u


def rel_change(new, old):
    return float(np.max(np.abs(new - old) / np.maximum(np.abs(old), 1.0))) if old.size else 0.0


def oem_step(xty, a_mat, d, beta, kind, params, base, rep, other, sign):
    u = compute_u(xty, a_mat, beta, rep, other, sign)
    return threshold(kind, u, d, params, base, beta), u


def oem_run(xty, a_mat, d, beta0, kind, params, base, rep, other, sign, tol, max_iter, record):
    """Iterate OEM steps until the relative coefficient change drops below tol.

    Returns ``(beta, u, iterations, converged, path)`` where ``path`` is an
    ``(iterations + 1, p)`` array of iterates when ``record`` is true.
    """
    beta = np.array(beta0, dtype=float)
    path = [beta.copy()] if record else None
    u = np.array(xty, dtype=float)
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        new, u = oem_step(xty, a_mat, d, beta, kind, params, base, rep, other, sign)
        change = rel_change(new, beta)
        beta = new
        if record:
            path.append(beta.copy())
        if change < tol:
            converged = True
            break
    return beta, u, it, converged, (np.array(path) if record else None)
