"""Fixed quadrature rules with algebraic endpoint weights.

Integrals over directions from a boundary point vanish like ``s^p`` at the
tangent directions, and radial integrals carry ``t^(a-1)``.  Gauss-Jacobi
rules absorb those factors so the remaining integrand is smooth.
"""

import functools

import numpy as np
from scipy.special import roots_jacobi, zeta

RADIAL_ORDER = 8


@functools.lru_cache(maxsize=256)
def _jacobi(n: int, alpha: float, beta: float):
    x, w = roots_jacobi(n, alpha, beta)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def radial_rule(a: float, n: int = RADIAL_ORDER):
    """Nodes/weights for ``int_0^1 g(t) t^(a-1) dt`` (exact for deg(g) < 2n)."""
    x, w = _jacobi(n, 0.0, float(a) - 1.0)
    return 0.5 * (1.0 + x), w * 2.0 ** (-float(a))


def half_circle_rule(m: int, p: float):
    """Angles ``s`` in (0, pi) and weights for ``int_0^pi f(s) ds``.

    Exact when ``f(s) / (s (pi - s))^p`` is a polynomial of degree < 2m; the
    weights returned already include the division.
    """
    x, w = _jacobi(m, float(p), float(p))
    s = 0.5 * np.pi * (1.0 + x)
    wf = w * (0.5 * np.pi) ** (2.0 * p + 1.0) / (s * (np.pi - s)) ** p
    return s, wf


def hemisphere_rule(nt: int, nphi: int, p: float):
    """Cosines ``t`` in (0,1), azimuths, and product weights on a hemisphere.

    ``t`` is the cosine of the angle to the pole; the weights integrate
    ``f(t, phi) dt dphi`` with the factor ``t^p`` absorbed.
    """
    x, w = _jacobi(nt, 0.0, float(p))
    t = 0.5 * (1.0 + x)
    wt = w * 2.0 ** (-float(p) - 1.0) / t**p
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    return t, phi, np.outer(wt, np.full(nphi, 2.0 * np.pi / nphi))


def polar_cap_rule(npsi: int, nphi: int, p: float):
    """Polar angles in (0, pi) with weight ``psi^p`` absorbed, uniform azimuths."""
    x, w = _jacobi(npsi, 0.0, float(p))
    psi = 0.5 * np.pi * (1.0 + x)
    wpsi = w * (0.5 * np.pi) ** (p + 1.0) / psi**p
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    return psi, phi, np.outer(wpsi, np.full(nphi, 2.0 * np.pi / nphi))


def kink_coefficient(p: float) -> float:
    """Leading error constant of the trapezoid rule on ``|s|^p g(s)``.

    A uniform rule of spacing ``h`` with a node at the kink over-estimates
    each one-sided integral by ``zeta(-p) g(0) h^(p+1)`` to leading order.
    """
    return float(zeta(-float(p)))


def gauss_legendre_unit(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (1.0 + x), 0.5 * w
