"""Convex bodies described by support functions.

A body is a :class:`SupportField` (support values on a sphere grid) plus the
derived boundary map ``F(x) = grad h(x) + h(x) x`` and radial samples.  In the
plane the support function is represented by its trigonometric interpolant,
so ``h'``, ``h''`` and boundary points are available at any angle.  On S^2 the
body carries an evaluator returning ``h``, ``F`` and the Hessian of the
1-homogeneous extension at arbitrary directions: closed form for canonical
ellipsoids, interpolation for bodies loaded from samples.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DegenerateConvexityError, DomainError, GridError, ParameterError
from .sphere import (
    S2Interpolant,
    SphereGrid,
    fourier_coefficients,
    integrate,
    make_circle_grid,
    make_s2_grid,
    spectral_derivative,
    spherical_coordinates,
    trig_eval,
)

#: Relative convexity floor: b <= CONVEXITY_FLOOR * max h counts as degenerate.
CONVEXITY_FLOOR = 1e-8
#: Absolute tolerance of the support-inequality interior test.
INTERIOR_TOL = 1e-9


# ---------------------------------------------------------------------------
# S^2 evaluators


class EllipsoidSupport:
    """Closed-form support function ``|A x|`` of an axis-aligned ellipsoid."""

    def __init__(self, axes):
        self.axes = np.asarray(axes, dtype=float)
        self.a2 = self.axes**2

    def scaled(self, lam):
        return EllipsoidSupport(self.axes * lam)

    def value(self, x):
        return np.sqrt(np.sum(self.a2 * x * x, axis=-1))

    def point(self, x):
        return self.a2 * x / self.value(x)[..., None]

    def hessian(self, x):
        h = self.value(x)
        f = self.a2 * x / h[..., None]
        eye = np.zeros(x.shape[:-1] + (3, 3))
        eye[..., [0, 1, 2], [0, 1, 2]] = self.a2
        return (eye - f[..., :, None] * f[..., None, :]) / h[..., None, None]


class InterpolatedSupport:
    """Support function on S^2 reconstructed from product-grid samples."""

    SIN_FLOOR = 1e-7
    CHUNK = 4096

    def __init__(self, grid: SphereGrid, h):
        self.interp = S2Interpolant(grid, h)
        self.grid = grid
        self.h = np.asarray(h, dtype=float)

    def scaled(self, lam):
        return InterpolatedSupport(self.grid, self.h * lam)

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        out = [np.empty(flat.shape[0]) for _ in range(6)]
        theta, phi = spherical_coordinates(flat)
        for s in range(0, flat.shape[0], self.CHUNK):
            vals = self.interp.evaluate(theta[s:s + self.CHUNK], phi[s:s + self.CHUNK])
            for o, v in zip(out, vals):
                o[s:s + self.CHUNK] = v
        st = np.maximum(np.sin(theta), self.SIN_FLOOR)
        ct = np.cos(theta)
        cp, sp = np.cos(phi), np.sin(phi)
        e_t = np.column_stack([ct * cp, ct * sp, -np.sin(theta)])
        e_p = np.column_stack([-sp, cp, np.zeros_like(sp)])
        return flat, out, st, ct, e_t, e_p

    def value(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        theta, phi = spherical_coordinates(flat)
        out = np.empty(flat.shape[0])
        for s in range(0, flat.shape[0], self.CHUNK):
            out[s:s + self.CHUNK] = self.interp.evaluate(theta[s:s + self.CHUNK], phi[s:s + self.CHUNK])[0]
        return out.reshape(x.shape[:-1])

    def point(self, x):
        x = np.asarray(x, dtype=float)
        flat, (h, ht, hp, *_), st, _, e_t, e_p = self._parts(x)
        f = h[:, None] * flat + ht[:, None] * e_t + (hp / st)[:, None] * e_p
        return f.reshape(x.shape)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        flat, (h, ht, hp, htt, htp, hpp), st, ct, e_t, e_p = self._parts(x)
        cot = ct / st
        b_tt = htt + h
        b_tp = (htp - cot * hp) / st
        b_pp = hpp / st**2 + cot * ht + h
        out = (b_tt[:, None, None] * e_t[:, :, None] * e_t[:, None, :]
               + b_tp[:, None, None] * (e_t[:, :, None] * e_p[:, None, :] + e_p[:, :, None] * e_t[:, None, :])
               + b_pp[:, None, None] * e_p[:, :, None] * e_p[:, None, :])
        return out.reshape(x.shape[:-1] + (3, 3))


# ---------------------------------------------------------------------------
# support fields and bodies


@dataclass(frozen=True, eq=False)
class SupportField:
    """Support function samples on a sphere grid.

    ``symmetric`` flags an origin-symmetric body.  ``evaluator`` (S^2 only)
    overrides the default interpolating evaluator, e.g. with a closed form.
    """

    grid: SphereGrid
    h: np.ndarray
    symmetric: bool = False
    evaluator: object = None
    # derived caches (filled in __post_init__)
    coef: tuple = field(init=False, repr=False)
    h1: np.ndarray = field(init=False, repr=False)
    h2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        if h.shape != (self.grid.size,):
            raise GridError(f"support field has {h.shape} values for a grid of {self.grid.size} nodes")
        if not np.all(np.isfinite(h)):
            raise DomainError("support values must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if self.grid.dim == 2:
            if self.grid.rotation is not None:
                raise GridError("support fields live on unrotated grids")
            object.__setattr__(self, "coef", fourier_coefficients(h))
            object.__setattr__(self, "h1", spectral_derivative(h, 1))
            object.__setattr__(self, "h2", spectral_derivative(h, 2))
        else:
            if self.evaluator is None:
                object.__setattr__(self, "evaluator", InterpolatedSupport(self.grid, h))
            object.__setattr__(self, "coef", None)
            object.__setattr__(self, "h1", None)
            object.__setattr__(self, "h2", None)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @functools.cached_property
    def b(self) -> np.ndarray:
        """Radius of curvature h'' + h (S^1) or det(h_ij + h delta_ij) (S^2)."""
        if self.dim == 2:
            return self.h2 + self.h
        return np.linalg.det(self.bmat)

    @functools.cached_property
    def bmat(self) -> np.ndarray:
        """Per-node matrix h_ij + h delta_ij in the grid frame."""
        if self.dim == 2:
            return self.b[:, None, None]
        hess = self.evaluator.hessian(self.grid.nodes)
        fr = self.grid.frames
        return np.einsum("nia,nab,njb->nij", fr, hess, fr)

    def eval(self, theta, order: int = 2):
        """Interpolated h and its derivatives at arbitrary angles (S^1)."""
        a, b = self.coef
        return trig_eval(a, b, theta, order)

    def eval_point(self, theta):
        """Boundary point F at arbitrary angles (S^1)."""
        h, h1 = self.eval(theta, 1)
        c, s = np.cos(theta), np.sin(theta)
        return np.stack([h * c - h1 * s, h * s + h1 * c], axis=-1)

    def value_at(self, x):
        """Interpolated support value at unit vectors."""
        x = np.asarray(x, dtype=float)
        if self.dim == 2:
            return self.eval(np.arctan2(x[..., 1], x[..., 0]), 0)[0]
        return self.evaluator.value(x)


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A body together with its boundary map at the grid nodes."""

    support: SupportField
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sf = self.support
        if np.min(sf.h) <= 0.0:
            raise DomainError("support function must be positive (origin in the interior)")
        if sf.dim == 2:
            x = sf.grid.nodes
            e1 = sf.grid.frames[:, 0, :]
            pts = sf.h1[:, None] * e1 + sf.h[:, None] * x
        else:
            pts = sf.evaluator.point(sf.grid.nodes)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.support.dim

    @property
    def grid(self) -> SphereGrid:
        return self.support.grid

    @property
    def h(self) -> np.ndarray:
        return self.support.h

    @property
    def max_h(self) -> float:
        return float(np.max(self.support.h))

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.grid.size) / self.grid.size

    @functools.cached_property
    def radial(self) -> np.ndarray:
        """rho(u) at the grid directions, by ray casting from the origin."""
        nodes = self.grid.nodes
        rho, _ = cast_rays(self, np.zeros_like(nodes), nodes)
        return rho

    def convexity_floor(self) -> float:
        return CONVEXITY_FLOOR * self.max_h

    def require_convex(self):
        if np.min(self.support.b) <= self.convexity_floor():
            i = int(np.argmin(self.support.b))
            raise DegenerateConvexityError(
                f"radius of curvature {self.support.b[i]:.3e} at node {i} is below the convexity floor")

    def support_gap(self, z) -> np.ndarray:
        """max over grid nodes of <z,x> - h(x) for each point (positive = outside)."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        out = np.empty(z.shape[0])
        for s in range(0, z.shape[0], 4096):
            out[s:s + 4096] = np.max(z[s:s + 4096] @ self.grid.nodes.T - self.h, axis=1)
        return out


# ---------------------------------------------------------------------------
# ray casting


def cast_rays(body: ConvexBody, z, u, extended: bool = False, impl=None):
    """Vectorised exit distances ``rho_z(u)`` (no interior check).

    Returns ``(rho, normal)`` where ``normal`` is the outer normal at the exit
    point: an angle in the plane, a unit vector in space.  With ``extended``
    the base points may lie outside; rays whose line misses get ``nan``.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    z, u = np.broadcast_arrays(z, u)
    if body.dim == 2:
        a, b = body.support.coef
        nodes = body.grid.nodes
        rho, theta = _backend.raycast2d(a, b, nodes[:, 0], nodes[:, 1], body.h, z, u, extended, impl=impl)
        return rho, theta
    return _cast_rays_3d(body, z, u, extended)


def _tangent_basis(x):
    helper = np.where(np.abs(x[:, [0]]) < 0.9, np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    t1 = np.cross(x, helper)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(x, t1)
    return t1, t2


def _cast_rays_3d(body: ConvexBody, z, u, extended):
    ev = body.support.evaluator
    nodes = body.grid.nodes
    p = z.shape[0]
    x = np.empty((p, 3))
    for s in range(0, p, 2048):
        dots = u[s:s + 2048] @ nodes.T
        g = np.where(dots > 1e-12, (body.h - z[s:s + 2048] @ nodes.T) / np.where(dots > 1e-12, dots, 1.0), np.inf)
        x[s:s + 2048] = nodes[np.argmin(g, axis=1)]
    scale = max(1.0, body.max_h)
    converged = np.zeros(p, dtype=bool)
    for _ in range(40):
        idx = np.nonzero(~converged)[0]
        if idx.size == 0:
            break
        xi, zi, ui = x[idx], z[idx], u[idx]
        r = ev.point(xi) - zi
        r -= np.sum(r * ui, axis=1, keepdims=True) * ui
        res = np.linalg.norm(r, axis=1)
        done = res <= 1e-13 * scale
        converged[idx[done]] = True
        idx, xi, zi, ui, r = idx[~done], xi[~done], zi[~done], ui[~done], r[~done]
        if idx.size == 0:
            break
        t1, t2 = _tangent_basis(xi)
        hess = ev.hessian(xi)
        j1 = np.einsum("nab,nb->na", hess, t1)
        j2 = np.einsum("nab,nb->na", hess, t2)
        j1 -= np.sum(j1 * ui, axis=1, keepdims=True) * ui
        j2 -= np.sum(j2 * ui, axis=1, keepdims=True) * ui
        m11 = np.sum(j1 * j1, axis=1)
        m12 = np.sum(j1 * j2, axis=1)
        m22 = np.sum(j2 * j2, axis=1)
        r1 = -np.sum(j1 * r, axis=1)
        r2 = -np.sum(j2 * r, axis=1)
        det = m11 * m22 - m12 * m12
        det = np.where(np.abs(det) > 1e-300, det, 1e-300)
        d1 = (m22 * r1 - m12 * r2) / det
        d2 = (m11 * r2 - m12 * r1) / det
        step = np.hypot(d1, d2)
        shrink = np.minimum(1.0, 0.5 / np.maximum(step, 1e-300))
        xn = xi + (shrink * d1)[:, None] * t1 + (shrink * d2)[:, None] * t2
        xn /= np.linalg.norm(xn, axis=1, keepdims=True)
        # keep the iterate on the open half sphere facing u
        bad = np.sum(xn * ui, axis=1) <= 0.0
        if np.any(bad):
            xh = xi[bad] + 0.5 * (xn[bad] - xi[bad])
            xn[bad] = xh / np.linalg.norm(xh, axis=1, keepdims=True)
        x[idx] = xn
    f = ev.point(x)
    dot_ux = np.sum(u * x, axis=1)
    rho_point = np.sum((f - z) * u, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho_min = (ev.value(x) - np.sum(z * x, axis=1)) / dot_ux
    # the minimand is stationary at the exit normal, so its value is the
    # more accurate estimate unless the ray is nearly tangent
    rho = np.where(dot_ux > 1e-3, rho_min, rho_point)
    if extended:
        rho = np.where(converged, rho, np.nan)
    return rho, x


def ray_cast(body: ConvexBody, z, u) -> float:
    """Distance from ``z`` (in the closed body) to the boundary along ``u``."""
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if z.shape != (body.dim,) or u.shape != (body.dim,):
        raise ParameterError("z and u must be points of the ambient space")
    nu = np.linalg.norm(u)
    if not np.isfinite(nu) or nu == 0.0:
        raise ParameterError("direction must be a nonzero vector")
    if body.support_gap(z)[0] > INTERIOR_TOL:
        raise DomainError("base point lies outside the body")
    rho, _ = cast_rays(body, z[None, :], (u / nu)[None, :])
    return float(max(rho[0], 0.0))


# ---------------------------------------------------------------------------
# boundary quantities


def boundary_point(body: ConvexBody, i: int) -> np.ndarray:
    """F(x_i) = grad h + h x at grid node ``i``."""
    return body.points[int(i)].copy()


def gauss_curvature(body: ConvexBody, i: int) -> float:
    """Gauss curvature 1/det(h_ij + h delta_ij) of the boundary at node ``i``."""
    b = float(body.support.b[int(i)])
    if b <= body.convexity_floor():
        raise DegenerateConvexityError(f"radius of curvature {b:.3e} at node {i} is below the convexity floor")
    return 1.0 / b


def volume(body: ConvexBody) -> float:
    """(1/n) times the integral of rho^n over the sphere."""
    return integrate(body.grid, body.radial**body.dim) / body.dim


def locate_point(body: ConvexBody, z):
    """Support gap ``max_x <z,x> - h(x)`` and the direction attaining it.

    The gap is zero on the boundary, negative inside and positive outside;
    for boundary points the direction is the outer normal.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (body.dim,):
        raise ParameterError("z must be a point of the ambient space")
    gaps = z @ body.grid.nodes.T - body.h
    k = int(np.argmax(gaps))
    if body.dim == 2:
        theta = float(body.theta[k])
        for _ in range(60):
            h, h1, h2 = body.support.eval(np.array([theta]), 2)[:, 0]
            c, s = np.cos(theta), np.sin(theta)
            g1 = -z[0] * s + z[1] * c - h1
            g2 = -z[0] * c - z[1] * s - h2
            step = -g1 / g2 if g2 < 0.0 else np.sign(g1) * min(abs(g1), 0.05)
            step = float(np.clip(step, -0.2, 0.2))
            theta += step
            if abs(step) < 1e-15:
                break
        theta %= 2.0 * np.pi
        h = body.support.eval(np.array([theta]), 0)[0, 0]
        return float(z[0] * np.cos(theta) + z[1] * np.sin(theta) - h), theta
    ev = body.support.evaluator
    x = body.grid.nodes[k][None, :]
    for _ in range(60):
        r = z - ev.point(x)[0]
        t1, t2 = _tangent_basis(x)
        hess = ev.hessian(x)[0]
        m = np.array([[t1[0] @ hess @ t1[0], t1[0] @ hess @ t2[0]],
                      [t2[0] @ hess @ t1[0], t2[0] @ hess @ t2[0]]])
        d = np.linalg.solve(m, np.array([r @ t1[0], r @ t2[0]]))
        step = np.hypot(*d)
        if step > 0.2:
            d *= 0.2 / step
        x = x + d[0] * t1 + d[1] * t2
        x /= np.linalg.norm(x)
        if step < 1e-15:
            break
    return float(z @ x[0] - ev.value(x)[0]), x[0]


def boundary_normal(body: ConvexBody, z, tol: float = INTERIOR_TOL):
    """Outer normal (angle in 2-D, unit vector in 3-D) at a boundary point.

    Raises a domain error when ``z`` is not on the boundary.
    """
    gap, normal = locate_point(body, z)
    if abs(gap) > tol * max(1.0, body.max_h):
        raise DomainError(f"point is not on the boundary (support gap {gap:.3e})")
    return normal


# ---------------------------------------------------------------------------
# construction, rescaling, validation


def make_canonical_body(kind: str, params, grid: SphereGrid) -> ConvexBody:
    """Ball, ellipse or ellipsoid centred at the origin."""
    params = [float(p) for p in np.atleast_1d(params)]
    if any(p <= 0.0 or not np.isfinite(p) for p in params):
        raise ParameterError(f"{kind} parameters must be positive, got {params}")
    x = grid.nodes
    if kind == "ball":
        if len(params) != 1:
            raise ParameterError("ball takes one radius")
        axes = [params[0]] * grid.dim
    elif kind == "ellipse":
        if grid.dim != 2 or len(params) != 2:
            raise ParameterError("ellipse takes two semi-axes on a circle grid")
        axes = params
    elif kind == "ellipsoid":
        if grid.dim != 3 or len(params) != 3:
            raise ParameterError("ellipsoid takes three semi-axes on an S^2 grid")
        axes = params
    else:
        raise ParameterError(f"unknown body kind {kind!r}")
    axes = np.asarray(axes)
    if kind == "ball":
        h = np.full(grid.size, axes[0])
    else:
        h = np.sqrt(np.sum((axes * x) ** 2, axis=1))
    evaluator = EllipsoidSupport(axes) if grid.dim == 3 else None
    return ConvexBody(SupportField(grid, h, symmetric=True, evaluator=evaluator))


def body_from_support(grid: SphereGrid, h, symmetric=None) -> ConvexBody:
    """Body from raw support samples; symmetry is detected when not given."""
    h = np.asarray(h, dtype=float)
    if symmetric is None:
        symmetric = bool(symmetry_defect(grid, h) <= 1e-12 * max(1.0, np.max(np.abs(h))))
    return ConvexBody(SupportField(grid, h, symmetric=symmetric))


def rescale(body: ConvexBody, lam: float) -> ConvexBody:
    """The dilate lam * body."""
    lam = float(lam)
    if not lam > 0.0 or not np.isfinite(lam):
        raise ParameterError(f"scale factor must be positive, got {lam}")
    sf = body.support
    ev = sf.evaluator.scaled(lam) if sf.dim == 3 else None
    return ConvexBody(SupportField(sf.grid, sf.h * lam, symmetric=sf.symmetric, evaluator=ev))


def symmetry_defect(grid: SphereGrid, h) -> float:
    """max |h(x) - h(-x)| over the grid (antipodes by interpolation on S^2)."""
    h = np.asarray(h, dtype=float)
    if grid.dim == 2:
        n = grid.size
        return float(np.max(np.abs(h - np.roll(h, -n // 2))))
    ntheta, nphi = grid.shape
    if nphi % 2 == 0:
        rows = h.reshape(ntheta, nphi)
        # Gauss-Legendre rows are symmetric about the equator
        anti = np.roll(rows[::-1], -nphi // 2, axis=1)
        return float(np.max(np.abs(rows - anti)))
    ev = InterpolatedSupport(grid, h)
    return float(np.max(np.abs(h - ev.value(-grid.nodes))))


@dataclass(frozen=True)
class ValidationReport:
    positivity: float
    convexity: float
    symmetry: float
    ok: bool
    problems: tuple = ()


def validate(field_: SupportField) -> ValidationReport:
    """Positivity, convexity and symmetry margins of a support field."""
    pos = float(np.min(field_.h))
    if field_.dim == 2:
        conv = float(np.min(field_.b))
    else:
        conv = float(np.min(np.linalg.eigvalsh(field_.bmat)))
    sym = symmetry_defect(field_.grid, field_.h)
    problems = []
    if pos <= 0.0:
        problems.append("nonpositive support value")
    if conv <= CONVEXITY_FLOOR * float(np.max(field_.h)):
        problems.append("convexity margin below floor")
    if field_.symmetric and sym > 1e-12 * max(1.0, float(np.max(np.abs(field_.h)))):
        problems.append("flagged symmetric but h(-x) != h(x)")
    return ValidationReport(pos, conv, sym, not problems, tuple(problems))


# ---------------------------------------------------------------------------
# serialization


def write_body(body: ConvexBody, path) -> None:
    """Plain-text body file: header ``dim N`` then one node per line."""
    lines = [f"{body.dim} {body.grid.size}"]
    if body.dim == 2:
        for t, hv in zip(body.theta, body.h):
            lines.append(f"{float(t)!r} {float(hv)!r}")
    else:
        for x, hv in zip(body.grid.nodes, body.h):
            lines.append(" ".join(repr(float(v)) for v in (*x, hv)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_body(path) -> ConvexBody:
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        dim, n = int(rows[0][0]), int(rows[0][1])
        data = np.array([[float(v) for v in r] for r in rows[1:]])
    except (IndexError, ValueError) as exc:
        raise GridError(f"malformed body file {path}: {exc}") from None
    if data.shape[0] != n:
        raise GridError(f"body file declares {n} nodes but has {data.shape[0]}")
    if dim == 2:
        if data.shape[1] != 2:
            raise GridError("planar body lines must be 'theta h'")
        grid = make_circle_grid(n)
        if np.max(np.abs(data[:, 0] - 2.0 * np.pi * np.arange(n) / n)) > 1e-12:
            raise GridError("body file angles are not a uniform grid")
        return body_from_support(grid, data[:, 1])
    if dim == 3:
        if data.shape[1] != 4:
            raise GridError("spatial body lines must be 'x y z h'")
        ntheta = len(np.unique(np.round(data[:, 2], 12)))
        if ntheta == 0 or n % ntheta:
            raise GridError("cannot infer the product grid from the node list")
        grid = make_s2_grid(ntheta, n // ntheta)
        if np.max(np.abs(grid.nodes - data[:, :3])) > 1e-12:
            raise GridError("body file nodes do not match a product grid")
        return body_from_support(grid, data[:, 3])
    raise GridError(f"unsupported dimension {dim}")
