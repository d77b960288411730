"""Pure numpy implementation of the planar ray-casting kernel.

The compiled module ``_kernels`` exposes the same function with the same
signature; ``_backend`` picks one at import time.
"""

import numpy as np

HALF_PI = 0.5 * np.pi
MAX_ITER = 60


def _trig3(a, b, theta):
    """h, h', h'' of the trigonometric series at the angles ``theta``."""
    k = np.arange(a.shape[0], dtype=float)
    kt = np.multiply.outer(theta, k)
    c, s = np.cos(kt), np.sin(kt)
    t0 = c @ a + s @ b
    t1 = c @ (k * b) - s @ (k * a)
    t2 = -(c @ (k * k * a)) - s @ (k * k * b)
    return t0, t1, t2


def _cross_and_slope(a, b, theta, z, u):
    h, h1, h2 = _trig3(a, b, theta)
    ct, st = np.cos(theta), np.sin(theta)
    fx = h * ct - h1 * st - z[:, 0]
    fy = h * st + h1 * ct - z[:, 1]
    c = fx * u[:, 1] - fy * u[:, 0]
    slope = -(h2 + h) * (ct * u[:, 0] + st * u[:, 1])
    return c, slope, fx, fy


def raycast2d(a, b, node_cos, node_sin, h_nodes, z, u, extended=False):
    """Exit distance along ``u`` from ``z`` for a body given by Fourier data.

    Parameters
    ----------
    a, b : cosine/sine coefficients of the support function.
    node_cos, node_sin, h_nodes : grid samples used for the starting guess.
    z, u : arrays of shape (P, 2); ``u`` must be unit vectors.
    extended : allow ``z`` outside the body.  Rays whose supporting line
        misses the body get ``nan``.

    Returns
    -------
    rho, theta : exit distance (may be negative in extended mode) and the
        outer normal angle at the exit point.
    """
    z = np.ascontiguousarray(z, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    p = z.shape[0]
    alpha = np.arctan2(u[:, 1], u[:, 0])

    # starting guess: node minimising (h - <z,x>)/<u,x> over the open half circle
    dots = np.multiply.outer(u[:, 0], node_cos) + np.multiply.outer(u[:, 1], node_sin)
    zx = np.multiply.outer(z[:, 0], node_cos) + np.multiply.outer(z[:, 1], node_sin)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(dots > 1e-12, (h_nodes - zx) / dots, np.inf)
    best = np.argmin(g, axis=1)
    theta_best = np.arctan2(node_sin[best], node_cos[best])
    tau = (theta_best - alpha + np.pi) % (2.0 * np.pi) - np.pi
    tau = np.clip(tau, -HALF_PI, HALF_PI)

    lo = np.full(p, -HALF_PI)
    hi = np.full(p, HALF_PI)
    miss = np.zeros(p, dtype=bool)
    if extended:
        c_lo, _, _, _ = _cross_and_slope(a, b, alpha + lo, z, u)
        c_hi, _, _, _ = _cross_and_slope(a, b, alpha + hi, z, u)
        miss = (c_lo < 0.0) | (c_hi > 0.0)

    active = ~miss
    for _ in range(MAX_ITER):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        t = tau[idx]
        c, slope, _, _ = _cross_and_slope(a, b, alpha[idx] + t, z[idx], u[idx])
        l, h = lo[idx], hi[idx]
        l = np.where(c > 0.0, t, l)
        h = np.where(c < 0.0, t, h)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = t - c / slope
        ok = (slope < 0.0) & (newton > l) & (newton < h)
        t_new = np.where(ok, newton, 0.5 * (l + h))
        t_new = np.where(c == 0.0, t, t_new)
        done = (np.abs(t_new - t) <= 1e-15 * (1.0 + np.abs(t))) | (h - l <= 4e-16) | (c == 0.0)
        tau[idx] = t_new
        lo[idx], hi[idx] = l, h
        active[idx[done]] = False

    theta = alpha + tau
    _, _, fx, fy = _cross_and_slope(a, b, theta, z, u)
    rho = fx * u[:, 0] + fy * u[:, 1]
    rho[miss] = np.nan
    return rho, theta % (2.0 * np.pi)
