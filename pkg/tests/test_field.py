import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fisher_harnack.field import (
    ScalarField,
    TorusGrid,
    geodesic_distance,
    gradient,
    hessian_frobenius_sq,
    laplacian,
    load_snapshot,
    save_snapshot,
)


def sine_field(m, L=1.0):
    g = TorusGrid((m,), (L,))
    (x,) = g.coordinates()
    return ScalarField(g, np.sin(2 * math.pi * x / L)), x


def test_grid_properties():
    g = TorusGrid((16, 32), (1.0, 2.0))
    assert g.spacing == (1 / 16, 2 / 32)
    assert g.size == 512
    with pytest.raises(ValueError):
        TorusGrid((4,), (1.0,))
    with pytest.raises(ValueError):
        TorusGrid((16,), (0.0,))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_constant_field_derivatives_vanish(n):
    g = TorusGrid.uniform(n, 8, 1.0)
    f = ScalarField(g, np.full(g.shape, 0.3))
    assert np.all(gradient(f) == 0)
    assert np.all(laplacian(f).values == 0)
    assert np.all(hessian_frobenius_sq(f).values == 0)


def test_fields_are_immutable():
    f, _ = sine_field(16)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def max_errors_1d(m):
    L = 1.0
    f, x = sine_field(m, L)
    k = 2 * math.pi / L
    e_grad = np.abs(gradient(f)[0] - k * np.cos(k * x)).max()
    e_lap = np.abs(laplacian(f).values + k * k * np.sin(k * x)).max()
    e_hess = np.abs(hessian_frobenius_sq(f).values - (k * k * np.sin(k * x)) ** 2).max()
    return e_grad, e_lap, e_hess


def test_sine_derivatives_second_order():
    coarse, fine = max_errors_1d(32), max_errors_1d(64)
    for ec, ef in zip(coarse, fine):
        assert math.log2(ec / ef) >= 1.9
    assert coarse[0] < 0.05 and coarse[1] < 0.15


def product_errors_2d(m):
    g = TorusGrid.uniform(2, m, 1.0)
    x, y = g.coordinates()
    k = 2 * math.pi
    u = np.sin(k * x) * np.sin(2 * k * y)
    f = ScalarField(g, u)
    lap = laplacian(f).values
    uxx = -k * k * u
    uyy = -4 * k * k * u
    uxy = 2 * k * k * np.cos(k * x) * np.cos(2 * k * y)
    hess = uxx**2 + uyy**2 + 2 * uxy**2
    return np.abs(lap - (uxx + uyy)).max(), np.abs(hessian_frobenius_sq(f).values - hess).max()


def test_2d_eigenfunction_and_mixed_partials():
    coarse, fine = product_errors_2d(32), product_errors_2d(64)
    for ec, ef in zip(coarse, fine):
        assert math.log2(ec / ef) >= 1.9


def test_cauchy_schwarz_on_grid():
    g = TorusGrid.uniform(2, 64, 1.0)
    x, y = g.coordinates()
    u = ScalarField(g, np.sin(2 * math.pi * x) + 0.5 * np.cos(2 * math.pi * (x + 2 * y)))
    lap = laplacian(u).values
    assert np.all(hessian_frobenius_sq(u).values >= lap**2 / 2 - 1e-9)


@pytest.mark.parametrize(
    "lengths, x1, x2, expected",
    [
        ((1.0,), (0.1,), (0.9,), 0.2),
        ((1.0,), (0.3,), (0.3,), 0.0),
        ((1.0, 1.0), (0.0, 0.0), (0.6, 0.3), 0.5),
        ((2.0, 1.0, 1.0), (0.1, 0.1, 0.1), (1.9, 0.1, 0.6), math.hypot(0.2, 0.5)),
    ],
)
def test_geodesic_distance(lengths, x1, x2, expected):
    g = TorusGrid(tuple(8 for _ in lengths), lengths)
    assert geodesic_distance(g, x1, x2) == pytest.approx(expected, abs=1e-15)


def random_field(rng, shape):
    return rng.standard_normal(shape)


@pytest.mark.parametrize("shape", [(32,), (16, 12), (8, 10, 12)])
def test_summation_by_parts_and_conservation(shape):
    rng = np.random.default_rng(3)
    g = TorusGrid(shape, tuple(1.0 + 0.1 * i for i in range(len(shape))))
    f, h = ScalarField(g, random_field(rng, shape)), ScalarField(g, random_field(rng, shape))
    lf, lh = laplacian(f).values, laplacian(h).values
    a, b = np.sum(lf * h.values), np.sum(f.values * lh)
    assert a == pytest.approx(b, rel=1e-12)
    assert abs(lf.mean()) <= 1e-12 * np.abs(lf).max()


@settings(max_examples=30)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_operators_are_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    g = TorusGrid((12, 10), (1.0, 1.3))
    u, v = random_field(rng, g.shape), random_field(rng, g.shape)
    comb = ScalarField(g, a * u + b * v)
    fu, fv = ScalarField(g, u), ScalarField(g, v)
    scale = (abs(a) + abs(b) + 1) * 1e3
    assert np.allclose(laplacian(comb).values, a * laplacian(fu).values + b * laplacian(fv).values, atol=1e-12 * scale)
    assert np.allclose(gradient(comb), a * gradient(fu) + b * gradient(fv), atol=1e-12 * scale)


def test_snapshot_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    g = TorusGrid((8, 9), (1.5, 2.0))
    f = ScalarField(g, rng.uniform(size=g.shape))
    save_snapshot(tmp_path / "s.txt", f, 0.125)
    back, t = load_snapshot(tmp_path / "s.txt")
    assert t == 0.125
    assert back.grid == g
    assert np.array_equal(back.values, f.values)
    head = (tmp_path / "s.txt").read_text().splitlines()[0]
    assert head == "2 8 9 1.5 2 0.125"


def test_nearest_index_wraps():
    g = TorusGrid((8,), (1.0,))
    assert g.nearest_index((0.99,)) == (0,)
    assert g.nearest_index((0.19,)) == (2,)
