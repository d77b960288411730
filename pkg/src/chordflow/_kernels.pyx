# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled planar ray-casting kernel (same contract as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, atan2, fabs, fmod, M_PI, NAN, INFINITY

cnp.import_array()

cdef double HALF_PI = 0.5 * M_PI
cdef int MAX_ITER = 60


cdef inline void trig3(const double[::1] a, const double[::1] b, double theta,
                       double *h0, double *h1, double *h2) noexcept nogil:
    cdef Py_ssize_t k, n = a.shape[0]
    cdef double c1 = cos(theta), s1 = sin(theta)
    cdef double ck = 1.0, sk = 0.0, tmp, term, kk
    cdef double v0 = a[0], v1 = 0.0, v2 = 0.0
    for k in range(1, n):
        tmp = ck * c1 - sk * s1
        sk = sk * c1 + ck * s1
        ck = tmp
        kk = <double>k
        term = a[k] * ck + b[k] * sk
        v0 += term
        v1 += kk * (b[k] * ck - a[k] * sk)
        v2 -= kk * kk * term
    h0[0] = v0
    h1[0] = v1
    h2[0] = v2


cdef inline double cross_eval(const double[::1] a, const double[::1] b, double theta,
                              double zx, double zy, double ux, double uy,
                              double *slope, double *fx, double *fy) noexcept nogil:
    cdef double h, h1, h2
    trig3(a, b, theta, &h, &h1, &h2)
    cdef double ct = cos(theta), st = sin(theta)
    fx[0] = h * ct - h1 * st - zx
    fy[0] = h * st + h1 * ct - zy
    slope[0] = -(h2 + h) * (ct * ux + st * uy)
    return fx[0] * uy - fy[0] * ux


cdef void cast_range(const double[::1] a, const double[::1] b,
                     const double[::1] ncos, const double[::1] nsin, const double[::1] hn,
                     const double[:, ::1] z, const double[:, ::1] u, bint extended,
                     double[::1] rho, double[::1] theta_out,
                     Py_ssize_t start, Py_ssize_t stop) noexcept nogil:
    cdef Py_ssize_t i, k, nn = hn.shape[0], best
    cdef double zx, zy, ux, uy, alpha, d, g, gbest, tau, lo, hi, c, slope, fx, fy
    cdef double newton, t_new, th
    cdef int it
    for i in range(start, stop):
        zx = z[i, 0]; zy = z[i, 1]; ux = u[i, 0]; uy = u[i, 1]
        alpha = atan2(uy, ux)
        best = -1
        gbest = INFINITY
        for k in range(nn):
            d = ux * ncos[k] + uy * nsin[k]
            if d > 1e-12:
                g = (hn[k] - zx * ncos[k] - zy * nsin[k]) / d
                if g < gbest:
                    gbest = g
                    best = k
        if best >= 0:
            tau = fmod(atan2(nsin[best], ncos[best]) - alpha + 3.0 * M_PI, 2.0 * M_PI) - M_PI
        else:
            tau = 0.0
        if tau < -HALF_PI:
            tau = -HALF_PI
        if tau > HALF_PI:
            tau = HALF_PI
        lo = -HALF_PI
        hi = HALF_PI
        if extended:
            if cross_eval(a, b, alpha + lo, zx, zy, ux, uy, &slope, &fx, &fy) < 0.0 or \
               cross_eval(a, b, alpha + hi, zx, zy, ux, uy, &slope, &fx, &fy) > 0.0:
                rho[i] = NAN
                theta_out[i] = NAN
                continue
        for it in range(MAX_ITER):
            c = cross_eval(a, b, alpha + tau, zx, zy, ux, uy, &slope, &fx, &fy)
            if c == 0.0:
                break
            if c > 0.0:
                lo = tau
            else:
                hi = tau
            newton = tau - c / slope
            if slope < 0.0 and newton > lo and newton < hi:
                t_new = newton
            else:
                t_new = 0.5 * (lo + hi)
            if fabs(t_new - tau) <= 1e-15 * (1.0 + fabs(tau)) or hi - lo <= 4e-16:
                tau = t_new
                break
            tau = t_new
        th = alpha + tau
        cross_eval(a, b, th, zx, zy, ux, uy, &slope, &fx, &fy)
        rho[i] = fx * ux + fy * uy
        th = fmod(th, 2.0 * M_PI)
        if th < 0.0:
            th += 2.0 * M_PI
        theta_out[i] = th


def raycast2d(a, b, node_cos, node_sin, h_nodes, z, u, extended=False):
    cdef const double[::1] a_ = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] b_ = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] nc = np.ascontiguousarray(node_cos, dtype=np.float64)
    cdef const double[::1] ns = np.ascontiguousarray(node_sin, dtype=np.float64)
    cdef const double[::1] hn = np.ascontiguousarray(h_nodes, dtype=np.float64)
    cdef const double[:, ::1] z_ = np.ascontiguousarray(z, dtype=np.float64)
    cdef const double[:, ::1] u_ = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t p = z_.shape[0]
    rho = np.empty(p)
    theta = np.empty(p)
    cdef double[::1] r_ = rho
    cdef double[::1] t_ = theta
    cdef bint ext = bool(extended)
    with nogil:
        cast_range(a_, b_, nc, ns, hn, z_, u_, ext, r_, t_, 0, p)
    return rho, theta
