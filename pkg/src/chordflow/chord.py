"""Chord integrals, chord measures and the chord Monge-Ampere residual.

Two deterministic routes to I_q: the volume integral of the dual
quermassintegral V_{q-1} over the body (cone-decomposed about the origin),
and the boundary integral of h against the chord measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body import ConvexBody
from .errors import DomainError, ParameterError, UnsupportedError
from .quadrature import gauss_legendre_unit
from .riesz import vtilde_interior, vtilde_nodes, _default_dirs
from .sphere import UNIT_BALL_VOLUME, integrate, make_circle_grid, make_s2_grid

RADIAL_ORDER = 16


@dataclass(frozen=True)
class ChordResult:
    value: float
    route: str
    error: float


def _check_q(q):
    if not np.isfinite(q) or q <= 1.0:
        raise UnsupportedError(f"chord integrals are evaluated for q > 1, got {q}")


def _dual_at_order(body, q, order, grid=None):
    # V_{q-1} is not smooth at the boundary; t = 1 - (1-s)^2 grades the
    # radial nodes toward it
    s, ws = gauss_legendre_unit(order)
    t = 1.0 - (1.0 - s) ** 2
    w = 2.0 * (1.0 - s) * ws
    rho = body.radial
    nodes = body.grid.nodes
    n = body.dim
    pts = (rho[:, None, None] * t[None, :, None]) * nodes[:, None, :]
    v = vtilde_interior(body, q - 1.0, pts.reshape(-1, n), grid).reshape(rho.size, order)
    radial = (v * (rho[:, None] * t[None, :]) ** (n - 1)) @ w * rho
    return q / UNIT_BALL_VOLUME[n] * integrate(body.grid, radial)


def _shifted_direction_grid(grid):
    """Same-size direction grid rotated by half a node spacing.

    Near the boundary the inner integrand has a narrow peak opposite the
    point's own direction.  Grids that contain that direction all see it the
    same way, so a coarser nested grid can hide the error; a shifted grid
    does not.
    """
    if grid.dim == 2:
        return make_circle_grid(grid.size, offset=np.pi / grid.size)
    a = np.pi / grid.shape[1]
    rot = np.array([[np.cos(a), -np.sin(a), 0.0], [np.sin(a), np.cos(a), 0.0], [0.0, 0.0, 1.0]])
    return grid.rotated(rot)


def _half_direction_grid(grid):
    if grid.dim == 2:
        return make_circle_grid(max(8, 2 * (grid.size // 4)))
    nt, nphi = grid.shape
    return make_s2_grid(max(4, nt // 2), max(8, nphi // 2))


def chord_integral_dual(body: ConvexBody, q: float, radial_order: int = RADIAL_ORDER) -> ChordResult:
    """I_q = (q / omega_n) * integral over the body of V_{q-1}(body, z) dz.

    The error estimate adds the change under half the radial order to the
    larger change of the inner V_{q-1} under a half-resolution direction
    grid or a grid shifted by half a spacing.
    """
    _check_q(q)
    value = _dual_at_order(body, q, radial_order)
    radial = _dual_at_order(body, q, max(2, radial_order // 2))
    angular = max(abs(value - _dual_at_order(body, q, radial_order, g))
                  for g in (_half_direction_grid(body.grid), _shifted_direction_grid(body.grid)))
    return ChordResult(float(value), "dual-volume", float(abs(value - radial) + angular))


def chord_measure_densities(body: ConvexBody, q: float, directions=None, vtilde=None) -> np.ndarray:
    """Density of the chord measure F_q against spherical Lebesgue measure."""
    _check_q(q)
    body.require_convex()
    if vtilde is None:
        vtilde = vtilde_nodes(body, q - 1.0, directions=directions)
    return 2.0 * q / UNIT_BALL_VOLUME[body.dim] * vtilde * body.support.b


def chord_measure_density(body: ConvexBody, q: float, i: int) -> float:
    _check_q(q)
    body.require_convex()
    v = vtilde_nodes(body, q - 1.0, [int(i)])[0]
    return float(2.0 * q / UNIT_BALL_VOLUME[body.dim] * v * body.support.b[int(i)])


def cone_chord_density(body: ConvexBody, q: float, i: int) -> float:
    """Density of the cone-chord measure G_q = h dF_q / (n + q - 1)."""
    return float(body.h[int(i)] * chord_measure_density(body, q, i) / (body.dim + q - 1.0))


def cone_chord_densities(body: ConvexBody, q: float, directions=None, vtilde=None) -> np.ndarray:
    dens = chord_measure_densities(body, q, directions, vtilde)
    return body.h * dens / (body.dim + q - 1.0)


def chord_integral_measure(body: ConvexBody, q: float, directions=None, vtilde=None) -> ChordResult:
    """I_q = (1/(q+n-1)) * integral of h dF_q.

    The error estimate is the change when the direction rule at each boundary
    point is halved.
    """
    _check_q(q)
    value = integrate(body.grid, cone_chord_densities(body, q, directions, vtilde))
    dirs = _default_dirs(body, directions)
    half = max(4, dirs // 2) if body.dim == 2 else (max(4, dirs[0] // 2), dirs[1])
    coarse = integrate(body.grid, cone_chord_densities(body, q, half))
    return ChordResult(float(value), "measure-form", float(abs(value - coarse)))


def chord_integral_value(body: ConvexBody, q: float, vtilde=None) -> float:
    """Measure-route value without the error estimate (used by the flow)."""
    _check_q(q)
    return float(integrate(body.grid, cone_chord_densities(body, q, vtilde=vtilde)))


def ma_residual(body: ConvexBody, q: float, f, vtilde=None) -> np.ndarray:
    """h det(grad^2 h + h I) V_{q-1}(body, F(x)) - f at every node."""
    _check_q(q)
    f = np.asarray(f, dtype=float)
    if f.shape != (body.grid.size,):
        raise ParameterError("f must be a field on the body grid")
    if not np.all(f > 0.0):
        raise DomainError("f must be positive")
    body.require_convex()
    if vtilde is None:
        vtilde = vtilde_nodes(body, q - 1.0)
    return body.h * body.support.b * vtilde - f


def target_chord_integral(q: float, f, grid) -> float:
    """Value of I_q fixed by the flow's normalisation: 2q int f / ((q+n-1) omega_n)."""
    n = grid.dim
    return 2.0 * q * integrate(grid, f) / ((q + n - 1.0) * UNIT_BALL_VOLUME[n])
