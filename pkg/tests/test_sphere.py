import numpy as np
import pytest
from hypothesis import given, strategies as st

from chordflow.errors import GridError, UnsupportedError
from chordflow.sphere import (S2Interpolant, differentiate_periodic, integrate, make_circle_grid, make_s2_grid,
                              pairwise_sum, spectral_derivative)


def test_circle_grid_basics():
    g = make_circle_grid(8)
    assert g.size == 8
    assert integrate(g, np.ones(8)) == pytest.approx(2 * np.pi, abs=1e-14)
    g16 = make_circle_grid(16)
    np.testing.assert_allclose(g16.nodes[0], [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(g16.nodes[8], [-1.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("n", [7, 6, 0, -8])
def test_circle_grid_rejects_bad_counts(n):
    with pytest.raises(GridError):
        make_circle_grid(n)


@pytest.mark.parametrize("grid", [make_circle_grid(64), make_s2_grid(16, 32), make_s2_grid(5, 9)])
def test_grid_invariants(grid):
    np.testing.assert_allclose(np.linalg.norm(grid.nodes, axis=1), 1.0, atol=1e-12)
    area = 2 * np.pi if grid.dim == 2 else 4 * np.pi
    assert np.sum(grid.weights) == pytest.approx(area, abs=1e-10)
    assert np.all(grid.weights > 0)
    fr = grid.frames
    np.testing.assert_allclose(np.linalg.norm(fr, axis=2), 1.0, atol=1e-12)
    assert np.max(np.abs(np.einsum("nkd,nd->nk", fr, grid.nodes))) <= 1e-12
    if grid.dim == 3:
        assert np.max(np.abs(np.einsum("nd,nd->n", fr[:, 0], fr[:, 1]))) <= 1e-12


def test_s2_grid_moments():
    g = make_s2_grid(16, 32)
    assert integrate(g, np.ones(g.size)) == pytest.approx(4 * np.pi, abs=1e-12)
    assert abs(integrate(g, g.nodes[:, 2])) <= 1e-13
    assert integrate(g, g.nodes[:, 2] ** 2) == pytest.approx(4 * np.pi / 3, abs=1e-12)
    with pytest.raises(GridError):
        make_s2_grid(3, 32)
    with pytest.raises(GridError):
        make_s2_grid(16, 7)


def test_integrate_circle_examples():
    g = make_circle_grid(64)
    th = g.theta
    assert abs(integrate(g, np.cos(th))) <= 1e-14
    assert integrate(g, np.cos(th) ** 2) == pytest.approx(np.pi, abs=1e-13)
    with pytest.raises(GridError):
        integrate(g, np.ones(32))


def test_differentiate_examples():
    g = make_circle_grid(32)
    th = g.theta
    np.testing.assert_allclose(differentiate_periodic(g, np.sin(th), 1), np.cos(th), atol=1e-10)
    np.testing.assert_allclose(differentiate_periodic(g, np.full(32, 3.0), 2), 0.0, atol=1e-12)
    np.testing.assert_allclose(differentiate_periodic(g, np.cos(2 * th), 2), -4 * np.cos(2 * th), atol=1e-10)
    with pytest.raises(UnsupportedError):
        differentiate_periodic(make_s2_grid(8, 16), np.ones(128), 1)


values32 = st.lists(st.floats(-10, 10, allow_nan=False), min_size=32, max_size=32).map(np.array)


@given(values32, values32, st.floats(-3, 3))
def test_integrate_linear(f, g, c):
    grid = make_circle_grid(32)
    lhs = integrate(grid, f + c * g)
    rhs = integrate(grid, f) + c * integrate(grid, g)
    assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + np.abs(f).sum() + abs(c) * np.abs(g).sum()))


@given(values32)
def test_integrate_positive(f):
    assert integrate(make_circle_grid(32), np.abs(f)) >= 0.0


@given(values32)
def test_derivative_integrates_to_zero(f):
    grid = make_circle_grid(32)
    for order in (1, 2):
        assert abs(integrate(grid, differentiate_periodic(grid, f, order))) <= 1e-10 * (1 + np.abs(f).sum())


@given(values32, st.sampled_from([1, 2]))
def test_derivative_shift_equivariant(f, order):
    a = spectral_derivative(np.roll(f, 1), order)
    b = np.roll(spectral_derivative(f, order), 1)
    np.testing.assert_allclose(a, b, atol=1e-9 * (1 + np.abs(f).max()))


def test_pairwise_sum_is_order_fixed():
    x = np.random.default_rng(1).standard_normal(1001)
    assert pairwise_sum(x) == pairwise_sum(x.copy())
    assert pairwise_sum(x) == pytest.approx(np.sum(x), abs=1e-12)


def test_s2_interpolant_reproduces_ellipsoid():
    g = make_s2_grid(32, 64)
    axes = np.array([1.5, 1.0, 0.7])
    h = np.sqrt(np.sum((axes * g.nodes) ** 2, axis=1))
    interp = S2Interpolant(g, h)
    rng = np.random.default_rng(0)
    th = np.arccos(rng.uniform(-1, 1, 200))
    ph = rng.uniform(0, 2 * np.pi, 200)
    x = np.column_stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    exact = np.sqrt(np.sum((axes * x) ** 2, axis=1))
    np.testing.assert_allclose(interp.evaluate(th, ph)[0], exact, atol=1e-8)


@pytest.mark.parametrize("order", [3, 4, 5])
def test_trig_eval_high_derivatives(order):
    from chordflow.sphere import fourier_coefficients, trig_eval

    g = make_circle_grid(32)
    a, b = fourier_coefficients(np.cos(3 * g.theta))
    t = np.array([0.3, 1.1])
    got = trig_eval(a, b, t, order)[order]
    exact = 3.0**order * np.cos(3 * t + order * np.pi / 2)
    np.testing.assert_allclose(got, exact, atol=1e-9 * 3.0**order)
