# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled OEM kernels; same interface as ``_pykernels``."""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()

DEF NONE = 0
DEF LASSO = 1
DEF ELASTIC_NET = 2
DEF SCAD = 3
DEF MCP = 4
DEF GARROTE = 5
DEF BERHU = 6
DEF BRIDGE = 7
DEF BISECT_STEPS = 80


cdef inline double _sign(double x) nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef inline double _soft(double u, double lam) nogil:
    cdef double m = fabs(u) - lam
    if m < 0.0:
        m = 0.0
    return _sign(u) * m


cdef inline double _bridge_obj(double b, double u, double d, double lam, double a) nogil:
    return d * b * b - 2.0 * u * b + lam * pow(fabs(b), a)


cdef double _bridge(double u, double d, double lam, double a) nogil:
    cdef double au = fabs(u)
    cdef double hi, bm, gm, lo, mid, gp, b
    cdef int k
    if lam == 0.0:
        return u / d
    if au == 0.0:
        return 0.0
    hi = au / d
    bm = pow(lam * a * (1.0 - a) / (2.0 * d), 1.0 / (2.0 - a))
    if not (bm < hi):
        return 0.0
    gm = 2.0 * d * bm - 2.0 * au + lam * a * pow(bm, a - 1.0)
    if not (gm < 0.0):
        return 0.0
    lo = bm
    for k in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        gp = 2.0 * d * mid - 2.0 * au + lam * a * pow(mid, a - 1.0)
        if gp > 0.0:
            hi = mid
        else:
            lo = mid
    b = 0.5 * (lo + hi)
    if _bridge_obj(b, au, d, lam, a) < 0.0:
        return _sign(u) * b
    return 0.0


cdef double _scalar(int kind, double u, double d, double lam, double lam2,
                    double a, double delta, double base, double old, bint has_old) nogil:
    cdef double au = fabs(u)
    cdef double new, m
    if kind == NONE:
        return u / d
    if kind == LASSO:
        return _soft(u, lam) / d
    if kind == ELASTIC_NET:
        return _soft(u, lam) / (d + lam2)
    if kind == SCAD:
        if au <= (d + 1.0) * lam:
            return _soft(u, lam) / d
        if au <= a * lam * d:
            return _sign(u) * ((a - 1.0) * au - a * lam) / ((a - 1.0) * d - 1.0)
        return u / d
    if kind == MCP:
        if au <= a * lam * d:
            m = au - lam
            if m < 0.0:
                m = 0.0
            return _sign(u) * a * m / (a * d - 1.0)
        return u / d
    if kind == GARROTE:
        m = (u * base - lam) / (d * base * base)
        if m < 0.0:
            m = 0.0
        return m * base
    if kind == BERHU:
        if au < lam + d * delta:
            return _soft(u, lam) / d
        return u * delta / (lam + d * delta)
    # BRIDGE
    new = _bridge(u, d, lam, a)
    if has_old and _bridge_obj(new, u, d, lam, a) > _bridge_obj(old, u, d, lam, a):
        return old
    return new


def threshold(int kind, u, d, params, base, beta_old=None):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef Py_ssize_t p = uv.shape[0]
    cdef const double[::1] dv = np.ascontiguousarray(np.broadcast_to(np.asarray(d, dtype=np.float64), (p,)))
    cdef const double[::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(np.broadcast_to(np.asarray(base, dtype=np.float64), (p,)))
    cdef bint has_old = beta_old is not None
    cdef const double[::1] ov = np.ascontiguousarray(beta_old if has_old else np.zeros(p), dtype=np.float64).ravel()
    out = np.empty(p)
    cdef double[::1] res = out
    cdef Py_ssize_t j
    if kind < 0 or kind > BRIDGE:
        raise ValueError(f"unknown penalty kind code {kind}")
    with nogil:
        for j in range(p):
            res[j] = _scalar(kind, uv[j], dv[j], pv[0], pv[1], pv[2], pv[3], bv[j], ov[j], has_old)
    if np.ndim(u) == 0:
        return out[0]
    return out


cdef void _compute_u(const double[::1] xty, const double[:, ::1] amat, const double[::1] beta,
                     const Py_ssize_t[::1] rep, const Py_ssize_t[::1] other,
                     const double[::1] sign, double[::1] u) noexcept nogil:
    cdef Py_ssize_t p = xty.shape[0]
    cdef Py_ssize_t i, k, r, o
    cdef double acc
    for i in range(p):
        acc = 0.0
        for k in range(p):
            acc = acc + amat[i, k] * beta[k]
        u[i] = xty[i] + acc
    for k in range(rep.shape[0]):
        r = rep[k]
        o = other[k]
        if beta[o] == sign[k] * beta[r]:
            u[o] = sign[k] * u[r]


def compute_u(xty, a_mat, beta, rep, other, sign):
    xv = np.ascontiguousarray(xty, dtype=np.float64)
    out = np.empty(xv.shape[0])
    _compute_u(xv, np.ascontiguousarray(a_mat, dtype=np.float64),
               np.ascontiguousarray(beta, dtype=np.float64),
               np.ascontiguousarray(rep, dtype=np.intp), np.ascontiguousarray(other, dtype=np.intp),
               np.ascontiguousarray(sign, dtype=np.float64), out)
    return out


def rel_change(new, old):
    cdef const double[::1] nv = np.ascontiguousarray(new, dtype=np.float64)
    cdef const double[::1] ov = np.ascontiguousarray(old, dtype=np.float64)
    return _rel_change(nv, ov)


cdef double _rel_change(const double[::1] new, const double[::1] old) noexcept nogil:
    cdef Py_ssize_t j
    cdef double m = 0.0, den, c
    for j in range(new.shape[0]):
        den = fabs(old[j])
        if den < 1.0:
            den = 1.0
        c = fabs(new[j] - old[j]) / den
        if c > m:
            m = c
    return m


def oem_step(xty, a_mat, d, beta, int kind, params, base, rep, other, sign):
    u = compute_u(xty, a_mat, beta, rep, other, sign)
    return threshold(kind, u, d, params, base, beta), u


def oem_run(xty, a_mat, d, beta0, int kind, params, base, rep, other, sign,
            double tol, Py_ssize_t max_iter, bint record):
    cdef const double[::1] xv = np.ascontiguousarray(xty, dtype=np.float64)
    cdef Py_ssize_t p = xv.shape[0]
    cdef const double[:, ::1] av = np.ascontiguousarray(a_mat, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(np.broadcast_to(np.asarray(d, dtype=np.float64), (p,)))
    cdef const double[::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(np.broadcast_to(np.asarray(base, dtype=np.float64), (p,)))
    cdef const Py_ssize_t[::1] rv = np.ascontiguousarray(rep, dtype=np.intp)
    cdef const Py_ssize_t[::1] ov = np.ascontiguousarray(other, dtype=np.intp)
    cdef const double[::1] sv = np.ascontiguousarray(sign, dtype=np.float64)
    beta_arr = np.array(beta0, dtype=np.float64)
    new_arr = np.empty(p)
    u_arr = np.array(xv)
    cdef double[::1] beta = beta_arr
    cdef double[::1] new = new_arr
    cdef double[::1] u = u_arr
    cdef double[::1] tmp
    cdef Py_ssize_t it = 0, j
    cdef bint converged = False
    cdef double change
    path = [beta_arr.copy()] if record else None
    if kind < 0 or kind > BRIDGE:
        raise ValueError(f"unknown penalty kind code {kind}")
    while it < max_iter:
        it += 1
        with nogil:
            _compute_u(xv, av, beta, rv, ov, sv, u)
            for j in range(p):
                new[j] = _scalar(kind, u[j], dv[j], pv[0], pv[1], pv[2], pv[3], bv[j], beta[j], True)
            change = _rel_change(new, beta)
        beta_arr, new_arr = new_arr, beta_arr
        tmp = beta
        beta = new
        new = tmp
        if record:
            path.append(beta_arr.copy())
        if change < tol:
            converged = True
            break
    return beta_arr, u_arr, it, converged, (np.array(path) if record else None)
