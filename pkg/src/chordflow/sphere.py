"""Quadrature grids, integration and differentiation on S^1 and S^2.

Every other module evaluates integrals over unit directions through the
grids built here.  Circle grids are uniform; sphere grids are products of
Gauss-Legendre nodes in ``cos(theta)`` and a uniform azimuth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, UnsupportedError

#: Volume of the unit ball, indexed by ambient dimension.
UNIT_BALL_VOLUME = {2: np.pi, 3: 4.0 * np.pi / 3.0}

#: Surface measure of the unit sphere, indexed by ambient dimension.
SPHERE_AREA = {2: 2.0 * np.pi, 3: 4.0 * np.pi}


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Nodes, weights and tangent frames on the unit sphere S^{dim-1}.

    ``shape`` is ``(N,)`` for a circle grid and ``(ntheta, nphi)`` for a
    product grid on S^2 (row-major: polar index first).  ``rotation`` maps the
    canonical grid onto this one; it is the identity for freshly built grids.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    frames: np.ndarray
    shape: tuple
    rotation: np.ndarray = field(default=None)

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.frames):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def spacing(self) -> float:
        """Angular node spacing (circle) or azimuthal spacing (sphere)."""
        return 2.0 * np.pi / self.shape[-1]

    @property
    def theta(self) -> np.ndarray:
        """Node angles of a circle grid."""
        if self.dim != 2:
            raise GridError("theta is only defined on circle grids")
        return np.arctan2(self.nodes[:, 1], self.nodes[:, 0]) % (2.0 * np.pi)

    def rotated(self, rotation: np.ndarray) -> "SphereGrid":
        """Return the grid obtained by applying an orthogonal matrix."""
        rotation = np.asarray(rotation, dtype=float)
        base = np.eye(self.dim) if self.rotation is None else self.rotation
        return SphereGrid(
            dim=self.dim,
            nodes=self.nodes @ rotation.T,
            weights=self.weights.copy(),
            frames=self.frames @ rotation.T,
            shape=self.shape,
            rotation=rotation @ base,
        )


def make_circle_grid(n: int, offset: float = 0.0) -> SphereGrid:
    """Uniform grid of ``n`` angles ``offset + 2*pi*j/n`` on S^1."""
    if int(n) != n or n < 8 or n % 2:
        raise GridError(f"circle grid needs an even count >= 8, got {n}")
    n = int(n)
    theta = offset + 2.0 * np.pi * np.arange(n) / n
    c, s = np.cos(theta), np.sin(theta)
    nodes = np.column_stack([c, s])
    frames = np.column_stack([-s, c])[:, None, :]
    weights = np.full(n, 2.0 * np.pi / n)
    return SphereGrid(2, nodes, weights, frames, (n,))


def make_s2_grid(ntheta: int, nphi: int) -> SphereGrid:
    """Gauss-Legendre (in cos theta) times uniform azimuth product grid."""
    if ntheta < 4 or nphi < 8 or int(ntheta) != ntheta or int(nphi) != nphi:
        raise GridError(f"S^2 grid needs ntheta >= 4 and nphi >= 8, got {ntheta}x{nphi}")
    ntheta, nphi = int(ntheta), int(nphi)
    x, w = np.polynomial.legendre.leggauss(ntheta)
    # polar angle ascending, i.e. cos(theta) descending
    x, w = x[::-1], w[::-1]
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    st, ct = np.sin(th).ravel(), np.cos(th).ravel()
    sp, cp = np.sin(ph).ravel(), np.cos(ph).ravel()
    nodes = np.column_stack([st * cp, st * sp, ct])
    e_theta = np.column_stack([ct * cp, ct * sp, -st])
    e_phi = np.column_stack([-sp, cp, np.zeros_like(sp)])
    frames = np.stack([e_theta, e_phi], axis=1)
    weights = np.repeat(w, nphi) * (2.0 * np.pi / nphi)
    return SphereGrid(3, nodes, weights, frames, (ntheta, nphi))


def polar_angles(grid: SphereGrid) -> tuple[np.ndarray, np.ndarray]:
    """Polar angles (ascending) and azimuths of an unrotated S^2 grid."""
    ntheta, nphi = grid.shape
    x, _ = np.polynomial.legendre.leggauss(ntheta)
    return np.arccos(x[::-1]), 2.0 * np.pi * np.arange(nphi) / nphi


def pairwise_sum(values: np.ndarray) -> float:
    """Sum with a fixed binary tree, independent of how work was split."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0])


def pairwise_sum_rows(values: np.ndarray) -> np.ndarray:
    """Row-wise :func:`pairwise_sum` along the last axis."""
    v = np.asarray(values, dtype=float)
    if v.shape[-1] == 0:
        return np.zeros(v.shape[:-1])
    while v.shape[-1] > 1:
        if v.shape[-1] % 2:
            v = np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)
        v = v[..., 0::2] + v[..., 1::2]
    return v[..., 0]


def integrate(grid: SphereGrid, values) -> float:
    """Quadrature of a per-node field against the grid weights."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise GridError(f"field of shape {values.shape} does not match grid of {grid.size} nodes")
    return pairwise_sum(grid.weights * values)


def _wavenumbers(n: int) -> np.ndarray:
    return np.arange(n // 2 + 1, dtype=float)


def differentiate_periodic(grid: SphereGrid, values, order: int = 1) -> np.ndarray:
    """Spectral derivative of a field sampled on a circle grid.

    The Nyquist mode is dropped for odd orders so the result stays real.
    """
    if grid.dim != 2:
        raise UnsupportedError("tangential differentiation is only available on S^1")
    if order not in (1, 2):
        raise GridError("order must be 1 or 2")
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise GridError("field does not match grid")
    return spectral_derivative(values, order)


def spectral_derivative(values: np.ndarray, order: int) -> np.ndarray:
    n = values.shape[-1]
    k = _wavenumbers(n)
    coef = np.fft.rfft(values, axis=-1) * (1j * k) ** order
    if order % 2:
        coef[..., -1] = 0.0
    return np.fft.irfft(coef, n=n, axis=-1)


def fourier_coefficients(values) -> tuple[np.ndarray, np.ndarray]:
    """Cosine/sine coefficients of the real trigonometric interpolant.

    ``f(t) = sum_k a[k] cos(k t) + b[k] sin(k t)`` for ``k = 0..N/2`` with the
    Nyquist term carried as a pure cosine.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    c = np.fft.rfft(values, axis=-1) / n
    mult = np.full(n // 2 + 1, 2.0)
    mult[0] = 1.0
    mult[-1] = 1.0
    a = mult * c.real
    b = -mult * c.imag
    b[..., -1] = 0.0
    return a, b


def trig_eval(a: np.ndarray, b: np.ndarray, theta, order: int = 0, chunk: int = 4096):
    """Evaluate the interpolant and its derivatives up to ``order``.

    Returns an array of shape ``(order + 1,) + theta.shape``.
    """
    theta = np.asarray(theta, dtype=float)
    flat = theta.ravel()
    k = np.arange(a.shape[-1], dtype=float)
    out = np.empty((order + 1, flat.size))
    for start in range(0, flat.size, chunk):
        t = flat[start:start + chunk]
        kt = np.outer(t, k)
        c, s = np.cos(kt), np.sin(kt)
        for m in range(order + 1):
            km = k**m
            # m-th derivative of cos/sin cycles with period 4
            if m % 4 == 0:
                val = c @ (km * a) + s @ (km * b)
            elif m % 4 == 1:
                val = c @ (km * b) - s @ (km * a)
            elif m % 4 == 2:
                val = -(c @ (km * a)) - s @ (km * b)
            else:
                val = s @ (km * a) - c @ (km * b)
            out[m, start:start + chunk] = val
    return out.reshape((order + 1,) + theta.shape)


def shifted_samples(values, delta: float, order: int = 0) -> np.ndarray:
    """Interpolant (or its derivative) sampled at ``theta_j + delta``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    k = _wavenumbers(n)
    coef = np.fft.rfft(values, axis=-1) * np.exp(1j * k * delta) * (1j * k) ** order
    # irfft keeps the real part of the Nyquist bin, which is exactly the
    # shifted cosine-only Nyquist term and its derivatives
    return np.fft.irfft(coef, n=n, axis=-1)


class S2Interpolant:
    """Spectral interpolant of a field on an unrotated S^2 product grid.

    Each azimuthal Fourier mode m of the rows is fitted in the polar angle by
    a cosine series (m even) or a sine series (m odd), which is the parity a
    smooth function on the sphere has across the poles.  At Gauss-Legendre
    rows this is polynomial interpolation in cos(theta), so the fit is well
    conditioned and exact for band-limited fields.
    """

    def __init__(self, grid: SphereGrid, values):
        if grid.dim != 3 or grid.rotation is not None:
            raise GridError("S2Interpolant needs an unrotated S^2 product grid")
        ntheta, nphi = grid.shape
        self.ntheta, self.nphi = ntheta, nphi
        theta, _ = polar_angles(grid)
        rows = np.asarray(values, dtype=float).reshape(ntheta, nphi)
        a, b = fourier_coefficients(rows)
        k = np.arange(ntheta)
        cos_basis = np.cos(np.outer(theta, k))
        sin_basis = np.sin(np.outer(theta, k + 1))
        m = np.arange(a.shape[1])
        even = m % 2 == 0
        self.m = m.astype(float)
        self.even = even
        self.ca = np.zeros((ntheta, m.size))
        self.cb = np.zeros((ntheta, m.size))
        self.ca[:, even] = np.linalg.solve(cos_basis, a[:, even])
        self.cb[:, even] = np.linalg.solve(cos_basis, b[:, even])
        self.ca[:, ~even] = np.linalg.solve(sin_basis, a[:, ~even])
        self.cb[:, ~even] = np.linalg.solve(sin_basis, b[:, ~even])
        self.k_even = k.astype(float)
        self.k_odd = (k + 1).astype(float)

    def evaluate(self, theta, phi):
        """Return ``(h, h_t, h_p, h_tt, h_tp, h_pp)`` at polar coordinates."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        ke, ko = self.k_even, self.k_odd
        ce, se = np.cos(np.multiply.outer(theta, ke)), np.sin(np.multiply.outer(theta, ke))
        co, so = np.cos(np.multiply.outer(theta, ko)), np.sin(np.multiply.outer(theta, ko))
        ev, od = self.even, ~self.even
        # polar profiles of every azimuthal coefficient and two derivatives
        prof = []
        for c in (self.ca, self.cb):
            f0 = np.empty((theta.size, c.shape[1]))
            f1 = np.empty_like(f0)
            f2 = np.empty_like(f0)
            f0[:, ev] = ce @ c[:, ev]
            f1[:, ev] = -(se * ke) @ c[:, ev]
            f2[:, ev] = -(ce * ke**2) @ c[:, ev]
            f0[:, od] = so @ c[:, od]
            f1[:, od] = (co * ko) @ c[:, od]
            f2[:, od] = -(so * ko**2) @ c[:, od]
            prof.append((f0, f1, f2))
        (a0, a1, a2), (b0, b1, b2) = prof
        m = self.m
        mp = np.multiply.outer(phi, m)
        cm, sm = np.cos(mp), np.sin(mp)
        h = np.sum(a0 * cm + b0 * sm, axis=1)
        h_t = np.sum(a1 * cm + b1 * sm, axis=1)
        h_tt = np.sum(a2 * cm + b2 * sm, axis=1)
        h_p = np.sum(m * (b0 * cm - a0 * sm), axis=1)
        h_tp = np.sum(m * (b1 * cm - a1 * sm), axis=1)
        h_pp = -np.sum(m * m * (a0 * cm + b0 * sm), axis=1)
        return h, h_t, h_p, h_tt, h_tp, h_pp


def spherical_coordinates(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar angle and azimuth of unit vectors in R^3."""
    points = np.asarray(points, dtype=float)
    theta = np.arccos(np.clip(points[..., 2], -1.0, 1.0))
    phi = np.arctan2(points[..., 1], points[..., 0]) % (2.0 * np.pi)
    return theta, phi


def frame_completion(normal: np.ndarray) -> np.ndarray:
    """Orthonormal matrix whose first column is ``normal`` (R^3)."""
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)
    helper = np.eye(3)[np.argmin(np.abs(normal))]
    t1 = np.cross(normal, helper)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(normal, t1)
    return np.column_stack([normal, t2, t1])
