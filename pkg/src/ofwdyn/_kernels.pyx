# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled round-loop kernels.

Mirrors the Python reference loop in ``learners`` operation for operation:
the same LMO tie-breaking, the same line-search closed form, the same update
expressions.  Only flat float64 arrays cross the boundary; the wrapper in
``learners`` does the (learner, set, family) encoding.
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport fabs, sqrt

cnp.import_array()


cdef double _dot(const double* a, const double* b, Py_ssize_t d) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(d):
        s += a[i] * b[i]
    return s


cdef void _copy(const double* src, double* dst, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(d):
        dst[i] = src[i]


cdef void _sort_desc(double* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double key
    for i in range(1, n):
        key = a[i]
        j = i - 1
        while j >= 0 and a[j] < key:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


cdef void _proj_simplex(const double* p, double target, double* sort_buf,
                        double* out, Py_ssize_t d) noexcept nogil:
    # Exact sort-and-threshold projection onto {x >= 0, sum x = target}.
    cdef Py_ssize_t i
    cdef double css = 0.0, tau = 0.0
    _copy(p, sort_buf, d)
    _sort_desc(sort_buf, d)
    for i in range(d):
        css += sort_buf[i]
        if sort_buf[i] - (css - target) / (i + 1) > 0.0:
            tau = (css - target) / (i + 1)
    for i in range(d):
        out[i] = p[i] - tau
        if out[i] < 0.0:
            out[i] = 0.0


cdef void _lmo(int kind, const double* center, double radius,
               const double* lower, const double* upper,
               const double* g, double* out, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i, idx
    cdef double norm, scale, best, m
    if kind == 0:  # ball
        norm = sqrt(_dot(g, g, d))
        if norm == 0.0:
            _copy(center, out, d)
            return
        scale = radius / norm
        for i in range(d):
            out[i] = center[i] - scale * g[i]
        return
    if kind == 1:  # box: zero entries take lower
        for i in range(d):
            out[i] = upper[i] if g[i] < 0.0 else lower[i]
        return
    if kind == 2:  # simplex: largest index on ties
        best = g[0]
        idx = 0
        for i in range(1, d):
            if g[i] <= best:
                best = g[i]
                idx = i
        for i in range(d):
            out[i] = 0.0
        out[idx] = 1.0
        return
    # l1 ball: prefer -radius at the smallest index with g_i = +max|g|,
    # else +radius at the largest index with g_i = -max|g|.
    m = 0.0
    for i in range(d):
        if fabs(g[i]) > m:
            m = fabs(g[i])
    for i in range(d):
        out[i] = 0.0
    for i in range(d):
        if g[i] == m:
            out[i] = -radius
            return
    for i in range(d - 1, -1, -1):
        if g[i] == -m:
            out[i] = radius
            return


cdef void _project(int kind, const double* center, double radius,
                   const double* lower, const double* upper,
                   const double* p, double* out,
                   double* buf_a, double* buf_b, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double norm, scale, s1
    if kind == 0:  # ball
        norm = 0.0
        for i in range(d):
            buf_a[i] = p[i] - center[i]
            norm += buf_a[i] * buf_a[i]
        norm = sqrt(norm)
        if norm <= radius:
            _copy(p, out, d)
            return
        scale = radius / norm
        for i in range(d):
            out[i] = center[i] + scale * buf_a[i]
        return
    if kind == 1:  # box
        for i in range(d):
            out[i] = p[i]
            if out[i] < lower[i]:
                out[i] = lower[i]
            elif out[i] > upper[i]:
                out[i] = upper[i]
        return
    if kind == 2:
        _proj_simplex(p, 1.0, buf_a, out, d)
        return
    s1 = 0.0
    for i in range(d):
        s1 += fabs(p[i])
    if s1 <= radius:
        _copy(p, out, d)
        return
    for i in range(d):
        buf_b[i] = fabs(p[i])
    _proj_simplex(buf_b, radius, buf_a, out, d)
    for i in range(d):
        if p[i] < 0.0:
            out[i] = -out[i]
        elif p[i] == 0.0:
            out[i] = 0.0


cdef double _eval(int family, double alpha, const double* params, double b,
                  double asq, const double* x, double* g_out,
                  Py_ssize_t d) noexcept nogil:
    # family 0: params is the round's center; 1: params is the rank1 direction.
    cdef Py_ssize_t i
    cdef double acc = 0.0, diff, resid, coef
    if family == 0:
        for i in range(d):
            diff = x[i] - params[i]
            g_out[i] = alpha * diff
            acc += diff * diff
        return 0.5 * alpha * acc
    resid = -b
    for i in range(d):
        resid += params[i] * x[i]
    coef = alpha / asq * resid
    for i in range(d):
        g_out[i] = coef * params[i]
    return alpha / (2.0 * asq) * resid * resid


cdef double _ls_sigma(const double* g, const double* x, const double* v,
                      double alpha, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double num = 0.0, den = 0.0, diff, s
    for i in range(d):
        diff = x[i] - v[i]
        num += g[i] * diff
        den += diff * diff
    den *= alpha
    if den <= 0.0:
        return 0.0
    s = num / den
    if s < 0.0:
        s = 0.0
    if s > 1.0:
        s = 1.0
    return s


def run_trajectory(int learner, int K, double sigma_fixed,
                   int set_kind,
                   const double[::1] center, double radius,
                   const double[::1] lower, const double[::1] upper,
                   int family, double alpha,
                   const double[:, ::1] centers, const double[::1] avec,
                   const double[::1] bs,
                   const double[::1] x0, int T, bint record_inner):
    """Run T protocol rounds; returns (xs, fvals, grads, sigmas, vs, zs).

    Learner codes: 0 fixed-step OFW, 1 line-search OFW, 2 multi-update OFW,
    3 OGD, 4 greedy (drifting-quadratic only).  Set codes: 0 ball, 1 box,
    2 simplex, 3 l1-ball.  Family codes: 0 drifting-quadratic, 1 rank1.
    """
    cdef Py_ssize_t d = x0.shape[0]
    cdef int K_eff = K if learner == 2 else 1
    cdef bint has_sigma = learner <= 2
    cdef bint store_inner = learner == 2 and record_inner

    xs = np.empty((T + 1, d))
    fvals = np.empty(T)
    grads = np.empty((T, d))
    sigmas = np.empty((T, K_eff)) if has_sigma else None
    vs = np.empty((T, K_eff, d)) if has_sigma else None
    zs = np.empty((T, K_eff + 1, d)) if store_inner else None

    cdef double[:, ::1] xs_v = xs
    cdef double[::1] fvals_v = fvals
    cdef double[:, ::1] grads_v = grads
    cdef double[:, ::1] sigmas_v = sigmas if has_sigma else np.empty((1, 1))
    cdef double[:, :, ::1] vs_v = vs if has_sigma else np.empty((1, 1, 1))
    cdef double[:, :, ::1] zs_v = zs if store_inner else np.empty((1, 1, 1))

    work = np.empty((5, d))
    cdef double[:, ::1] work_v = work
    cdef double* gbuf = &work_v[0, 0]
    cdef double* vbuf = &work_v[1, 0]
    cdef double* zbuf = &work_v[2, 0]
    cdef double* buf_a = &work_v[3, 0]
    cdef double* buf_b = &work_v[4, 0]

    cdef const double* cptr = &center[0]
    cdef const double* loptr = &lower[0]
    cdef const double* upptr = &upper[0]
    cdef double asq = _dot(&avec[0], &avec[0], d) if family == 1 else 0.0

    cdef Py_ssize_t t, i, j
    cdef double s, b
    cdef const double* params
    cdef const double* g
    cdef const double* x

    _copy(&x0[0], &xs_v[0, 0], d)
    with nogil:
        for t in range(T):
            x = &xs_v[t, 0]
            if family == 0:
                params = &centers[t, 0]
                b = 0.0
            else:
                params = &avec[0]
                b = bs[t]
            fvals_v[t] = _eval(family, alpha, params, b, asq, x, &grads_v[t, 0], d)

            if learner == 0:
                _lmo(set_kind, cptr, radius, loptr, upptr, &grads_v[t, 0], vbuf, d)
                s = sigma_fixed
                sigmas_v[t, 0] = s
                _copy(vbuf, &vs_v[t, 0, 0], d)
                for i in range(d):
                    xs_v[t + 1, i] = (1.0 - s) * x[i] + s * vbuf[i]
            elif learner <= 2:
                _copy(x, zbuf, d)
                if store_inner:
                    _copy(zbuf, &zs_v[t, 0, 0], d)
                for j in range(K_eff):
                    if j == 0:
                        g = &grads_v[t, 0]
                    else:
                        _eval(family, alpha, params, b, asq, zbuf, gbuf, d)
                        g = gbuf
                    _lmo(set_kind, cptr, radius, loptr, upptr, g, vbuf, d)
                    s = _ls_sigma(g, zbuf, vbuf, alpha, d)
                    sigmas_v[t, j] = s
                    _copy(vbuf, &vs_v[t, j, 0], d)
                    for i in range(d):
                        zbuf[i] = (1.0 - s) * zbuf[i] + s * vbuf[i]
                    if store_inner:
                        _copy(zbuf, &zs_v[t, j + 1, 0], d)
                _copy(zbuf, &xs_v[t + 1, 0], d)
            elif learner == 3:
                for i in range(d):
                    zbuf[i] = x[i] - grads_v[t, i] / alpha
                _project(set_kind, cptr, radius, loptr, upptr, zbuf,
                         &xs_v[t + 1, 0], buf_a, buf_b, d)
            else:
                _project(set_kind, cptr, radius, loptr, upptr, &centers[t, 0],
                         &xs_v[t + 1, 0], buf_a, buf_b, d)

    for arr in (xs, fvals, grads, sigmas, vs, zs):
        if arr is not None:
            arr.flags.writeable = False
    return xs, fvals, grads, sigmas, vs, zs
