"""Generalized Riesz potentials and dual quermassintegrals on convex bodies.

All direction integrals from a boundary point run over the inward half
circle (or hemisphere) with Gauss-Jacobi rules that absorb the ``s^p``
vanishing of ``rho_z^p`` at the tangent directions; interior points use the
body's own sphere grid.  See ``quadrature`` for the rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .body import ConvexBody, SupportField, cast_rays, locate_point, _tangent_basis, INTERIOR_TOL
from .errors import DomainError, ParameterError, UnsupportedError
from .quadrature import (
    gauss_legendre_unit,
    half_circle_rule,
    hemisphere_rule,
    kink_coefficient,
    polar_cap_rule,
    radial_rule,
)
from .sphere import fourier_coefficients, integrate, pairwise_sum_rows, spectral_derivative, trig_eval


@dataclass(frozen=True)
class PotentialSpec:
    """Exponent ``a`` with angular weight ``omega(u)`` and density ``phi(y)``.

    ``omega`` and ``phi`` take arrays of shape (..., dim) and return arrays of
    shape (...); ``None`` means the constant 1.
    """

    a: float
    omega: Optional[Callable] = None
    phi: Optional[Callable] = None

    def __post_init__(self):
        if not np.isfinite(self.a) or self.a <= 0.0:
            raise ParameterError(f"potential exponent must be positive, got {self.a}")

    def omega_at(self, u):
        u = np.asarray(u, dtype=float)
        return np.ones(u.shape[:-1]) if self.omega is None else np.asarray(self.omega(u), dtype=float)

    def phi_at(self, y):
        y = np.asarray(y, dtype=float)
        return np.ones(y.shape[:-1]) if self.phi is None else np.asarray(self.phi(y), dtype=float)

    def phi_bar(self, z, u, rho):
        """Radial average ``int_0^1 phi(z + t rho u) t^(a-1) dt``."""
        if self.phi is None:
            return np.full(np.shape(rho), 1.0 / self.a)
        t, w = radial_rule(self.a)
        pts = z[..., None, :] + (t[:, None] * (rho[..., None, None] * u[..., None, :]))
        return self.phi_at(pts) @ w


def _default_dirs(body: ConvexBody, directions):
    """Quadrature sizes for boundary points: half the grid in each polar index."""
    if directions is not None:
        return directions
    if body.dim == 2:
        return max(8, body.grid.size // 2)
    nt, nphi = body.grid.shape
    return (max(4, nt // 2), nphi)


# ---------------------------------------------------------------------------
# point classification and boundary direction sets


def classify(body: ConvexBody, z):
    """Return ``("boundary", normal)`` or ``("interior", None)``; raise if outside."""
    gap, normal = locate_point(body, z)
    tol = INTERIOR_TOL * max(1.0, body.max_h)
    if gap > tol:
        raise DomainError(f"point lies outside the body (support gap {gap:.3e})")
    if gap >= -tol:
        return "boundary", normal
    return "interior", None


def _frame2(theta):
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([c, s], -1), np.stack([-s, c], -1)


def _half_circle_rays(body, thetas, s):
    """Boundary points at normal angles ``thetas`` and inward rays at angles ``s``.

    Returns ``z (P,2)``, ``u (P,M,2)``, ``rho (P,M)``.
    """
    thetas = np.atleast_1d(thetas)
    z = body.support.eval_point(thetas)
    nu, tang = _frame2(thetas)
    u = np.cos(s)[None, :, None] * tang[:, None, :] - np.sin(s)[None, :, None] * nu[:, None, :]
    p, m = u.shape[:2]
    rho, _ = cast_rays(body, np.repeat(z, m, axis=0), u.reshape(-1, 2))
    return z, u, np.maximum(rho.reshape(p, m), 0.0)


def _hemisphere_rays(body, normal, nt, nphi, p):
    """Inward hemisphere rays from the boundary point with outer normal ``normal``."""
    normal = np.asarray(normal, dtype=float)
    z = body.support.evaluator.point(normal[None, :])[0]
    t, phi, w = hemisphere_rule(nt, nphi, p)
    t1, t2 = _tangent_basis(normal[None, :])
    st = np.sqrt(1.0 - t**2)
    u = (-t[:, None, None] * normal
         + st[:, None, None] * (np.cos(phi)[None, :, None] * t1 + np.sin(phi)[None, :, None] * t2))
    u = u.reshape(-1, 3)
    rho, _ = cast_rays(body, np.broadcast_to(z, u.shape), u)
    return z, u, np.maximum(rho, 0.0), w.ravel()


def _node_thetas(body, idx):
    return body.theta[np.atleast_1d(idx)]


# ---------------------------------------------------------------------------
# dual quermassintegrals


def _check_q(q):
    if not np.isfinite(q) or q <= 0.0:
        raise UnsupportedError(f"dual quermassintegral needs q > 0, got {q}")


def vtilde_boundary(body: ConvexBody, q: float, normals, directions=None) -> np.ndarray:
    """Dual quermassintegral at the boundary points with the given outer normals.

    ``normals`` are angles (planar) or unit vectors (spatial).
    """
    _check_q(q)
    n = body.dim
    dirs = _default_dirs(body, directions)
    if n == 2:
        s, w = half_circle_rule(dirs, q)
        out = []
        thetas = np.atleast_1d(normals)
        step = max(1, 65536 // dirs)
        for k in range(0, thetas.size, step):
            _, _, rho = _half_circle_rays(body, thetas[k:k + step], s)
            out.append(pairwise_sum_rows(w * rho**q) / n)
        return np.concatenate(out)
    normals = np.atleast_2d(normals)
    vals = np.empty(normals.shape[0])
    for k, nu in enumerate(normals):
        _, _, rho, w = _hemisphere_rays(body, nu, dirs[0], dirs[1], q)
        vals[k] = pairwise_sum_rows(w * rho**q) / n
    return vals


def vtilde_nodes(body: ConvexBody, q: float, idx=None, directions=None) -> np.ndarray:
    """Dual quermassintegral at the boundary points F(x_i) of grid nodes."""
    idx = np.arange(body.grid.size) if idx is None else np.atleast_1d(idx)
    if body.dim == 2:
        return vtilde_boundary(body, q, body.theta[idx], directions)
    return vtilde_boundary(body, q, body.grid.nodes[idx], directions)


def vtilde_interior(body: ConvexBody, q: float, points, grid=None) -> np.ndarray:
    """Dual quermassintegral at interior points.

    Directions come from ``grid`` (default: the body's own sphere grid).
    """
    _check_q(q)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    grid = body.grid if grid is None else grid
    nodes = grid.nodes
    m = nodes.shape[0]
    out = np.empty(points.shape[0])
    step = max(1, 2**18 // m)
    for k in range(0, points.shape[0], step):
        pts = points[k:k + step]
        rho, _ = cast_rays(body, np.repeat(pts, m, axis=0), np.tile(nodes, (pts.shape[0], 1)))
        rho = np.maximum(rho.reshape(pts.shape[0], m), 0.0)
        out[k:k + step] = pairwise_sum_rows(grid.weights * rho**q) / body.dim
    return out


def dual_quermassintegral(body: ConvexBody, q: float, z, directions=None) -> float:
    """(1/n) times the integral of rho_z(u)^q over the sphere."""
    _check_q(q)
    kind, normal = classify(body, z)
    if kind == "boundary":
        return float(vtilde_boundary(body, q, [normal] if body.dim == 3 else normal, directions)[0])
    return float(vtilde_interior(body, q, z)[0])


# ---------------------------------------------------------------------------
# Riesz potentials


def _volume_form_2d(body, spec, thetas, m):
    s, w = half_circle_rule(m, spec.a)
    z, u, rho = _half_circle_rays(body, thetas, s)
    vals = spec.omega_at(u) * rho**spec.a * spec.phi_bar(z[:, None, :], u, rho)
    return pairwise_sum_rows(w * vals)


def _volume_form_3d(body, spec, normal, dirs):
    z, u, rho, w = _hemisphere_rays(body, normal, dirs[0], dirs[1], spec.a)
    vals = spec.omega_at(u) * rho**spec.a * spec.phi_bar(z[None, :], u, rho)
    return float(pairwise_sum_rows(w * vals))


def potential_volume_form(body: ConvexBody, spec: PotentialSpec, z, directions=None) -> float:
    """N_a(z) in spherical coordinates centred at the boundary point ``z``."""
    kind, normal = classify(body, z)
    if kind != "boundary":
        raise DomainError("the potential is evaluated at boundary points only")
    dirs = _default_dirs(body, directions)
    if body.dim == 2:
        return float(_volume_form_2d(body, spec, normal, dirs)[0])
    return _volume_form_3d(body, spec, normal, dirs)


def potential_volume_nodes(body: ConvexBody, spec: PotentialSpec, idx=None, directions=None) -> np.ndarray:
    """Volume form of N_a at the boundary points of grid nodes."""
    idx = np.arange(body.grid.size) if idx is None else np.atleast_1d(idx)
    dirs = _default_dirs(body, directions)
    if body.dim == 2:
        step = max(1, 65536 // dirs)
        return np.concatenate([_volume_form_2d(body, spec, body.theta[idx[k:k + step]], dirs)
                               for k in range(0, idx.size, step)])
    return np.array([_volume_form_3d(body, spec, body.grid.nodes[i], dirs) for i in idx])


def _phi_a_pairs(spec, y, z):
    """phi_a(y, z) = int_0^1 phi(t y + (1-t) z) t^(a-1) dt for point arrays."""
    if spec.phi is None:
        return np.full(y.shape[:-1], 1.0 / spec.a)
    t, w = radial_rule(spec.a)
    pts = z[..., None, :] + t[:, None] * (y - z)[..., None, :]
    return spec.phi_at(pts) @ w


def _boundary_form_2d(body, spec, theta_z, ys, nus, bs, hstep):
    """Trapezoid over boundary nodes (the node at z excluded) plus kink term."""
    a = spec.a
    z = body.support.eval_point(np.array([theta_z]))[0]
    d = ys - z
    r = np.linalg.norm(d, axis=1)
    w_dir = spec.omega_at(d / r[:, None])
    vals = w_dir * np.sum(d * nus, axis=1) * r ** (a - 2.0) * _phi_a_pairs(spec, ys, z) * bs
    total = hstep * float(pairwise_sum_rows(vals))
    # the integrand behaves like (b^a / 2) (phi(z)/a) omega(+-T) |s|^a at the
    # excluded node; remove the leading trapezoid error of both one-sided kinks
    bz = float(body.support.eval(np.array([theta_z]), 2)[[0, 2], 0].sum())
    nu, tang = _frame2(theta_z)
    g = 0.5 * bz**a * float(spec.phi_at(z)) / a * (float(spec.omega_at(tang)) + float(spec.omega_at(-tang)))
    return total - kink_coefficient(a) * g * hstep ** (a + 1.0)


def _boundary_form_3d(body, spec, normal, nt, nphi):
    a = spec.a
    ev = body.support.evaluator
    z = ev.point(normal[None, :])[0]
    psi, phi, w = polar_cap_rule(nt, nphi, a)
    t1, t2 = _tangent_basis(normal[None, :])
    x = (np.cos(psi)[:, None, None] * normal
         + np.sin(psi)[:, None, None] * (np.cos(phi)[None, :, None] * t1 + np.sin(phi)[None, :, None] * t2))
    x = x.reshape(-1, 3)
    y = ev.point(x)
    hess = ev.hessian(x)
    b1, b2 = _tangent_basis(x)
    m11 = np.einsum("na,nab,nb->n", b1, hess, b1)
    m12 = np.einsum("na,nab,nb->n", b1, hess, b2)
    m22 = np.einsum("na,nab,nb->n", b2, hess, b2)
    detb = m11 * m22 - m12**2
    d = y - z
    r = np.linalg.norm(d, axis=1)
    vals = (spec.omega_at(d / r[:, None]) * np.sum(d * x, axis=1) * r ** (a - 3.0)
            * _phi_a_pairs(spec, y, z) * detb * np.repeat(np.sin(psi), nphi))
    return float(pairwise_sum_rows(w.ravel() * vals))


def potential_boundary_form(body: ConvexBody, spec: PotentialSpec, z) -> float:
    """N_a(z) as a surface integral over the boundary."""
    kind, normal = classify(body, z)
    if kind != "boundary":
        raise DomainError("the potential is evaluated at boundary points only")
    if body.dim == 2:
        n = body.grid.size
        thetas = normal + 2.0 * np.pi * np.arange(1, n) / n
        ys = body.support.eval_point(thetas)
        hv = body.support.eval(thetas, 2)
        nus, _ = _frame2(thetas)
        return _boundary_form_2d(body, spec, normal, ys, nus, hv[0] + hv[2], 2.0 * np.pi / n)
    nt, nphi = body.grid.shape
    return _boundary_form_3d(body, spec, normal, nt, nphi)


def potential_boundary_nodes(body: ConvexBody, spec: PotentialSpec, idx=None) -> np.ndarray:
    """Boundary form of N_a at the boundary points of grid nodes."""
    idx = np.arange(body.grid.size) if idx is None else np.atleast_1d(idx)
    if body.dim == 3:
        nt, nphi = body.grid.shape
        return np.array([_boundary_form_3d(body, spec, body.grid.nodes[i], nt, nphi) for i in idx])
    n = body.grid.size
    out = np.empty(idx.size)
    for k, i in enumerate(idx):
        others = (i + np.arange(1, n)) % n
        out[k] = _boundary_form_2d(body, spec, body.theta[i], body.points[others],
                                   body.grid.nodes[others], body.support.b[others], 2.0 * np.pi / n)
    return out


# ---------------------------------------------------------------------------
# tangential derivatives


def _grad_prefactor(q, n):
    return q * (n - q) / n


def _fd_boundary_gradient(body, q, i, step=1e-3):
    from .oracle import fd_derivative

    if body.dim == 2:
        def g(t):
            return vtilde_boundary(body, q, body.theta[i] + t)[0]
        return np.array([fd_derivative(g, 0.0, step, 1) / body.support.b[i]])
    x = body.grid.nodes[i]
    frame = body.grid.frames[i]
    d = np.empty(2)
    for k in range(2):
        def g(t, e=frame[k]):
            y = np.cos(t) * x + np.sin(t) * e
            return vtilde_boundary(body, q, [y])[0]
        d[k] = fd_derivative(g, 0.0, step, 1)
    return np.linalg.solve(body.support.bmat[i], d)


def dual_querm_gradient(body: ConvexBody, q: float, i: int, directions=None) -> np.ndarray:
    """Arclength gradient of z -> V_q(body, z) along the boundary at node ``i``.

    Components are taken along the grid frame vectors, which are also tangent
    to the boundary at F(x_i).  For ``q`` within 1e-6 of the dimension the
    prefactor of the integral identity vanishes and a finite difference of the
    boundary values is returned instead.
    """
    n = body.dim
    if not q > 1.0:
        raise UnsupportedError(f"the gradient identity needs q > 1, got {q}")
    i = int(i)
    body.require_convex()
    if abs(q - n) < 1e-6:
        return _fd_boundary_gradient(body, q, i)
    c = _grad_prefactor(q, n) / (q - 1.0)
    dirs = _default_dirs(body, directions)
    if n == 2:
        s, w = half_circle_rule(dirs, q - 1.0)
        _, u, rho = _half_circle_rays(body, body.theta[i], s)
        tang = body.grid.frames[i, 0]
        return np.array([c * float(pairwise_sum_rows(w * (u[0] @ tang) * rho[0] ** (q - 1.0)))])
    _, u, rho, w = _hemisphere_rays(body, body.grid.nodes[i], dirs[0], dirs[1], q - 1.0)
    kern = w * rho ** (q - 1.0)
    return np.array([c * float(pairwise_sum_rows(kern * (u @ e))) for e in body.grid.frames[i]])


def dual_querm_hessian(body: ConvexBody, q: float, i: int, directions=None) -> np.ndarray:
    """Second arclength derivative of V_q along a planar boundary, as a 1x1 matrix."""
    if body.dim != 2:
        raise UnsupportedError("the boundary Hessian is implemented for planar bodies")
    if not q > 2.0:
        raise UnsupportedError(f"the Hessian identity needs q > 2, got {q}")
    body.require_convex()
    n = 2
    i = int(i)
    dirs = _default_dirs(body, directions)
    nu = body.grid.nodes[i]
    tang = body.grid.frames[i, 0]
    kappa = 1.0 / body.support.b[i]
    s1, w1 = half_circle_rule(dirs, q - 1.0)
    _, u1, rho1 = _half_circle_rays(body, body.theta[i], s1)
    term1 = pairwise_sum_rows(w1 * (u1[0] @ (-kappa * nu)) * rho1[0] ** (q - 1.0)) / (q - 1.0)
    s2, w2 = half_circle_rule(dirs, q - 2.0)
    _, u2, rho2 = _half_circle_rays(body, body.theta[i], s2)
    ct = u2[0] @ tang
    term2 = pairwise_sum_rows(w2 * ((n + 2.0 - q) * ct**2 - 1.0) * rho2[0] ** (q - 2.0)) / (q - 2.0)
    return np.array([[_grad_prefactor(q, n) * float(term1 + term2)]])


def dual_querm_sphere_derivs(body: ConvexBody, q: float, i: int, directions=None):
    """First and second derivatives of theta -> V_q(body, F(theta)) at node ``i``."""
    if body.dim != 2:
        raise UnsupportedError("sphere-parameter derivatives are implemented for planar bodies")
    if not q > 2.0:
        raise UnsupportedError(f"needs q > 2, got {q}")
    grad = dual_querm_gradient(body, q, i, directions)[0]
    hess = dual_querm_hessian(body, q, i, directions)[0, 0]
    b = body.support.b
    db = spectral_derivative(b, 1)[int(i)]
    bi = b[int(i)]
    return np.array([bi * grad]), np.array([[db * grad + bi * bi * hess]])


# ---------------------------------------------------------------------------
# variation in time


def _cutoff(r, r0, r1):
    """Smooth partition function: 1 for r <= r0, 0 for r >= r1."""
    x = np.clip((r - r0) / (r1 - r0), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f1 = np.where(x < 1.0, np.exp(-1.0 / np.maximum(1.0 - x, 1e-300)), 0.0)
        f0 = np.where(x > 0.0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
    return f1 / (f0 + f1)


def dual_querm_time_derivative(body: ConvexBody, q: float, i: int, dh, directions=None,
                               radial_nodes: int = 48, far_nodes: int = 64) -> float:
    """d/dt of V_q(body_t, F_t(x_i)) for the support perturbation h + t*dh.

    Evaluates the two body integrals of the variational identity: the
    perturbation enters through psi = dh/h at the outer normal of the
    boundary point on the ray from the origin through y, and through the
    boundary-point velocity grad(dh) + dh x.  Near ``z`` the integrals run
    in polar coordinates about ``z``, elsewhere about the origin, joined by a
    smooth partition of unity.
    """
    if body.dim != 2:
        raise UnsupportedError("the time variation is implemented for planar bodies")
    if not q > 1.0:
        raise UnsupportedError(f"the time variation needs q > 1, got {q}")
    dh = np.asarray(dh, dtype=float)
    if dh.shape != (body.grid.size,):
        raise ParameterError("perturbation must be a field on the body grid")
    body.require_convex()
    n = 2
    i = int(i)
    if not np.any(dh):
        return 0.0
    dirs = _default_dirs(body, directions)
    z = body.points[i]
    theta_z = body.theta[i]
    nu, tang = _frame2(theta_z)
    dz = spectral_derivative(dh, 1)[i] * tang + dh[i] * nu

    # psi(w) = dh/h at the exit normal of the ray from the origin along w
    kdir = body.grid.size
    wang = 2.0 * np.pi * np.arange(kdir) / kdir
    wvec = np.column_stack([np.cos(wang), np.sin(wang)])
    rho0, theta_star = cast_rays(body, np.zeros_like(wvec), wvec)
    da, db_ = fourier_coefficients(dh)
    psi_samples = trig_eval(da, db_, theta_star)[0] / body.support.eval(theta_star, 0)[0]
    pa, pb = fourier_coefficients(psi_samples)

    def psi_at(y):
        return trig_eval(pa, pb, np.arctan2(y[..., 1], y[..., 0]))[0]

    zn = float(np.linalg.norm(z))
    r0, r1 = 0.2 * zn, 0.6 * zn

    # near part, polar about z
    def near(p_dir, p_rad, second):
        s, w = half_circle_rule(dirs, p_dir)
        _, u, rho = _half_circle_rays(body, theta_z, s)
        u, rho = u[0], rho[0]
        length = np.minimum(rho, r1)
        t, wt = radial_rule(p_rad, radial_nodes)
        r = length[:, None] * t[None, :]
        y = z + r[..., None] * u[:, None, :]
        g = _cutoff(r, r0, r1) * psi_at(y)
        if second:
            g = g * np.sum(y * u[:, None, :], axis=-1)
        inner = length**p_rad * (g @ wt)
        return float(pairwise_sum_rows(w * inner))

    a1_near = near(q, q, False)
    a2_near = near(q - 1.0, q - 1.0, True)

    # far part, polar about the origin
    sl, wl = gauss_legendre_unit(far_nodes)
    srad = rho0[:, None] * sl[None, :]
    y = srad[..., None] * wvec[:, None, :]
    d = y - z
    r = np.linalg.norm(d, axis=-1)
    keep = 1.0 - _cutoff(r, r0, r1)
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = np.where(keep > 0.0, r ** (q - n), 0.0)
        k2 = np.where(keep > 0.0, np.sum(y * d, axis=-1) * r ** (q - 2.0 - n), 0.0)
    jac = srad ** (n - 1) * rho0[:, None] * wl[None, :]
    a1_far = (2.0 * np.pi / kdir) * float(pairwise_sum_rows(psi_samples * pairwise_sum_rows(keep * k1 * jac)))
    a2_far = (2.0 * np.pi / kdir) * float(pairwise_sum_rows(psi_samples * pairwise_sum_rows(keep * k2 * jac)))

    # boundary-point velocity term
    s3, w3 = half_circle_rule(dirs, q - 1.0)
    _, u3, rho3 = _half_circle_rays(body, theta_z, s3)
    a3 = float(pairwise_sum_rows(w3 * (u3[0] @ dz) * rho3[0] ** (q - 1.0))) / (q - 1.0)

    a1 = a1_near + a1_far
    a2 = a2_near + a2_far
    return q * a1 + q * (q - n) / n * (a2 - a3)


# ---------------------------------------------------------------------------
# regularity probe


@dataclass(frozen=True)
class HolderEstimate:
    exponent: float
    residual: float
    flag: str = ""


def holder_exponent_estimate(positions, values, lag_range=None, periodic: bool = True) -> HolderEstimate:
    """Empirical Hoelder exponent from the growth of max |g(y1) - g(y2)|.

    ``positions`` are angles on the circle (``periodic``) or points in R^d.
    Pairs are binned by distance into dyadic octaves covering ``lag_range``
    (default: 1 to 8 times the typical spacing); the slope of log(max
    difference) against log(largest distance in the bin) is returned, capped
    to [0, 1].
    """
    pos = np.asarray(positions, dtype=float)
    g = np.asarray(values, dtype=float)
    m = g.shape[0]
    if m < 64:
        raise ParameterError("the probe needs at least 64 samples")
    if pos.ndim == 1:
        diff = np.abs(pos[:, None] - pos[None, :])
        if periodic:
            diff = np.minimum(diff, 2.0 * np.pi - diff)
    else:
        diff = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    if lag_range is None:
        nearest = np.median(np.min(np.where(diff > 0, diff, np.inf), axis=1))
        lag_range = (nearest * (1.0 - 1e-9), 8.0 * nearest * (1.0 + 1e-9))
    lo, hi = lag_range
    if not (lo > 0 and hi >= 4.0 * lo):
        raise ParameterError("lag range must span at least two octaves")
    dg = np.abs(g[:, None] - g[None, :])
    scale = max(float(np.max(np.abs(g))), 1e-300)
    xs, ys = [], []
    edge = lo
    while edge < hi * (1.0 - 1e-12):
        top = min(2.0 * edge, hi)
        mask = (diff >= edge) & (diff < top) if top < hi else (diff >= edge) & (diff <= top)
        if np.any(mask):
            xs.append(np.log(np.max(diff[mask])))
            ys.append(np.max(dg[mask]))
        edge = top
    ys = np.asarray(ys)
    if len(xs) < 2:
        raise ParameterError("lag range contains fewer than two populated octaves")
    if np.max(ys) <= 1e-13 * scale or np.max(np.abs(g - g[0])) == 0.0:
        return HolderEstimate(1.0, 0.0, "smooth-or-constant")
    ly = np.log(np.maximum(ys, 1e-300))
    coef, res, *_ = np.polyfit(np.asarray(xs), ly, 1, full=True)
    slope = float(np.clip(coef[0], 0.0, 1.0))
    resid = float(np.sqrt(res[0] / len(xs))) if len(res) else 0.0
    return HolderEstimate(slope, resid, "")
