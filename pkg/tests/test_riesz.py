import numpy as np
import pytest
from hypothesis import given, strategies as st

from chordflow.body import body_from_support, make_canonical_body, rescale
from chordflow.errors import DomainError, ParameterError, UnsupportedError
from chordflow.oracle import fd_derivative
from chordflow.riesz import (PotentialSpec, dual_quermassintegral, dual_querm_gradient, dual_querm_hessian,
                             dual_querm_sphere_derivs, dual_querm_time_derivative, holder_exponent_estimate,
                             potential_boundary_form, potential_boundary_nodes, potential_volume_form,
                             potential_volume_nodes, vtilde_boundary, vtilde_nodes)
from chordflow.sphere import make_circle_grid, spectral_derivative

NODE = 20


def smooth_spec(a):
    return PotentialSpec(a, omega=lambda u: 1 + 0.3 * u[..., 0] + 0.2 * u[..., 1] ** 2,
                         phi=lambda y: np.exp(0.2 * y[..., 0]) + 0.1 * y[..., 1])


# ---------------------------------------------------------------- potentials

@pytest.mark.parametrize("a,exact", [(2.0, np.pi), (1.0, 4.0)])
def test_disk_potential_forms(disk256, a, exact):
    z = disk256.points[37]
    vol = potential_volume_form(disk256, PotentialSpec(a), z)
    bnd = potential_boundary_form(disk256, PotentialSpec(a), z)
    assert vol == pytest.approx(exact, abs=1e-8)
    assert bnd == pytest.approx(vol, abs=1e-6 if a == 2 else 1e-5)


def test_ball_newtonian_potential(ball16):
    z = ball16.points[100]
    for form in (potential_volume_form, potential_boundary_form):
        assert form(ball16, PotentialSpec(2.0), z) == pytest.approx(4 * np.pi / 3, rel=1e-6)


def test_potential_errors(disk256):
    with pytest.raises(DomainError):
        potential_volume_form(disk256, PotentialSpec(2.0), [1.2, 0.0])
    with pytest.raises(DomainError):
        potential_boundary_form(disk256, PotentialSpec(2.0), [0.5, 0.0])
    with pytest.raises(ParameterError):
        PotentialSpec(0.0)


@pytest.mark.parametrize("a", [1.0, 2.0, 3.0])
def test_form_agreement_every_node(a):
    body = make_canonical_body("ellipse", [2.0, 1.0], make_circle_grid(512))
    vol = potential_volume_nodes(body, smooth_spec(a))
    bnd = potential_boundary_nodes(body, smooth_spec(a))
    assert np.max(np.abs(vol - bnd) / (1 + np.abs(vol))) <= 1e-5


def test_reduction_identity(ellipse256):
    for a in (1.5, 2.0, 3.0):
        pot = potential_volume_nodes(ellipse256, PotentialSpec(a), [3, 50])
        vq = vtilde_nodes(ellipse256, a, [3, 50])
        np.testing.assert_allclose(pot, 2 / a * vq, rtol=1e-12)


# ------------------------------------------------------ dual quermassintegrals

def test_dual_quermassintegral_examples(disk256, ball16):
    z = disk256.points[11]
    assert dual_quermassintegral(disk256, 2.0, z) == pytest.approx(np.pi, rel=1e-12)
    assert dual_quermassintegral(disk256, 3.0, z) == pytest.approx(16 / 3, rel=1e-10)
    assert dual_quermassintegral(ball16, 2.0, ball16.points[40]) == pytest.approx(8 * np.pi / 9, rel=1e-6)
    with pytest.raises(UnsupportedError):
        dual_quermassintegral(disk256, 0.0, z)
    with pytest.raises(DomainError):
        dual_quermassintegral(disk256, 2.0, [0.0, 1.5])


def test_cone_volume_identity_interior(ellipse256):
    assert dual_quermassintegral(ellipse256, 2.0, [0.3, -0.2]) == pytest.approx(2 * np.pi, rel=1e-8)


@given(st.sampled_from([0.5, 2.0]), st.floats(1.2, 5.0), st.integers(0, 255))
def test_vtilde_homogeneous(ellipse256, lam, q, node):
    base = vtilde_nodes(ellipse256, q, [node])[0]
    scaled = vtilde_nodes(rescale(ellipse256, lam), q, [node])[0]
    assert scaled == pytest.approx(lam**q * base, rel=1e-9)


@given(st.floats(1.2, 5.0), st.integers(0, 127))
def test_vtilde_symmetric(ellipse256, q, node):
    v = vtilde_nodes(ellipse256, q, [node, node + 128])
    assert v[0] == pytest.approx(v[1], rel=1e-10)


def test_vtilde_decreasing_in_q(disk256):
    small = rescale(disk256, 0.4)
    qs = [1.5, 2.0, 3.0, 4.0, 5.0]
    vals = [vtilde_nodes(small, q, [0])[0] for q in qs]
    assert np.all(np.diff(vals) < 0)


# ------------------------------------------------------------- derivatives

def _boundary_values(body, q):
    theta = body.theta[NODE]
    return lambda t: vtilde_boundary(body, q, theta + t)[0]


def test_gradient_disk_vanishes(disk256):
    for q in (1.5, 3.0, 4.5):
        assert abs(dual_querm_gradient(disk256, q, 7)[0]) <= 1e-10


def test_gradient_matches_fd(ellipse256):
    q = 3.0
    fd = fd_derivative(_boundary_values(ellipse256, q), 0.0, 1e-3, 1) / ellipse256.support.b[NODE]
    assert dual_querm_gradient(ellipse256, q, NODE)[0] == pytest.approx(fd, rel=1e-4)


def test_gradient_fd_converges(ellipse256):
    q = 3.0
    exact = dual_querm_gradient(ellipse256, q, NODE)[0]
    errs = [abs(fd_derivative(_boundary_values(ellipse256, q), 0.0, eps, 1) / ellipse256.support.b[NODE] - exact)
            for eps in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] <= 1e-4 * abs(exact)


def test_gradient_homogeneous(ellipse256):
    lam, q = 1.7, 3.0
    g1 = dual_querm_gradient(ellipse256, q, NODE)[0]
    g2 = dual_querm_gradient(rescale(ellipse256, lam), q, NODE)[0]
    assert g2 == pytest.approx(lam ** (q - 1) * g1, rel=1e-9)


def test_gradient_at_dimension_uses_fd(ellipse256):
    # V_n is the volume at every boundary point, so the gradient vanishes
    assert abs(dual_querm_gradient(ellipse256, 2.0, NODE)[0]) <= 1e-8
    with pytest.raises(UnsupportedError):
        dual_querm_gradient(ellipse256, 1.0, NODE)


def test_gradient_ball_3d(ball16):
    np.testing.assert_allclose(dual_querm_gradient(ball16, 3.0, 50), 0.0, atol=1e-8)


def _hessian_fd(body, q, eps=1e-3):
    g = _boundary_values(body, q)
    d1 = fd_derivative(g, 0.0, eps, 1)
    d2 = fd_derivative(g, 0.0, eps, 2)
    h, h1, h2, h3 = body.support.eval(np.array([body.theta[NODE]]), 3)[:, 0]
    b, db = h2 + h, h3 + h1
    return d2 / b**2 - db * d1 / b**3


def test_hessian_examples(disk256, ellipse256):
    assert abs(dual_querm_hessian(disk256, 3.0, 5)[0, 0]) <= 1e-6
    hs = dual_querm_hessian(ellipse256, 3.0, NODE)[0, 0]
    assert hs == pytest.approx(_hessian_fd(ellipse256, 3.0), rel=1e-3)
    with pytest.raises(UnsupportedError):
        dual_querm_hessian(ellipse256, 2.0, NODE)


def test_hessian_unsupported_in_3d(ball16):
    with pytest.raises(UnsupportedError):
        dual_querm_hessian(ball16, 3.0, 0)


def test_hessian_consistent_with_gradient_field():
    body = make_canonical_body("ellipse", [2.0, 1.0], make_circle_grid(128))
    q = 3.0
    grads = np.array([dual_querm_gradient(body, q, i)[0] for i in range(128)])
    from_grad = spectral_derivative(grads, 1) / body.support.b
    hess = np.array([dual_querm_hessian(body, q, i)[0, 0] for i in (0, 20, 45, 90)])
    np.testing.assert_allclose(hess, from_grad[[0, 20, 45, 90]], rtol=1e-3, atol=1e-3 * np.max(np.abs(hess)))


def test_sphere_derivs(disk256, ellipse256):
    g0, _ = dual_querm_sphere_derivs(disk256, 3.0, 3)
    assert abs(g0[0]) <= 1e-10
    grad, hess = dual_querm_sphere_derivs(ellipse256, 3.0, NODE)
    g = _boundary_values(ellipse256, 3.0)
    assert grad[0] == pytest.approx(fd_derivative(g, 0.0, 1e-3, 1), rel=1e-4)
    assert hess[0, 0] == pytest.approx(fd_derivative(g, 0.0, 1e-3, 2), rel=1e-4)
    boundary = dual_querm_gradient(ellipse256, 3.0, NODE)[0]
    assert grad[0] == pytest.approx(ellipse256.support.b[NODE] * boundary, rel=1e-8)


def test_time_derivative_examples(ellipse256):
    q = 3.0
    assert dual_querm_time_derivative(ellipse256, q, NODE, np.zeros(256)) == 0.0
    v = vtilde_nodes(ellipse256, q, [NODE])[0]
    dil = dual_querm_time_derivative(ellipse256, q, NODE, ellipse256.h)
    assert dil == pytest.approx(q * v, rel=1e-6)
    dh = np.cos(2 * ellipse256.theta)
    eps = 1e-4

    def vt(sign):
        body = body_from_support(ellipse256.grid, ellipse256.h + sign * eps * dh)
        return vtilde_nodes(body, q, [NODE])[0]

    fd = (vt(1) - vt(-1)) / (2 * eps)
    assert dual_querm_time_derivative(ellipse256, q, NODE, dh) == pytest.approx(fd, rel=1e-4)


def test_time_derivative_translation_on_disk(disk256):
    dh = 0.3 * np.cos(disk256.theta) - 0.2 * np.sin(disk256.theta)
    assert abs(dual_querm_time_derivative(disk256, 3.0, 9, dh)) <= 1e-6


# ------------------------------------------------------------------- probe

def test_probe_square_root():
    th = np.linspace(-np.pi, np.pi, 1024, endpoint=False)
    est = holder_exponent_estimate(th, np.sqrt(np.abs(th)))
    assert est.exponent == pytest.approx(0.5, abs=0.05)


def test_probe_smooth_and_constant():
    th = 2 * np.pi * np.arange(256) / 256
    assert holder_exponent_estimate(th, np.cos(th)).exponent >= 0.99
    const = holder_exponent_estimate(th, np.full(256, 2.5))
    assert const.exponent == 1.0 and const.flag == "smooth-or-constant"


def test_probe_input_checks():
    th = np.linspace(0, 1, 32)
    with pytest.raises(ParameterError):
        holder_exponent_estimate(th, th)
    th = np.linspace(0, 2 * np.pi, 128, endpoint=False)
    with pytest.raises(ParameterError):
        holder_exponent_estimate(th, np.cos(th), lag_range=(0.1, 0.2))
