import numpy as np
import pytest

import thermomap as tm
from thermomap.circle import DiscreteMeasure, GridFunction, integrate


def test_wrap_stays_in_fundamental_domain():
    xs = [-1e-20, -0.3, 0.0, 0.5, 0.999999, 1.0, 1.5, -2.25]
    for x in xs:
        w = tm.wrap(x)
        assert 0.0 <= w < 1.0
    arr = tm.wrap(np.array(xs))
    assert np.all((arr >= 0.0) & (arr < 1.0))


def test_circle_dist_examples():
    assert tm.circle_dist(0.1, 0.9) == pytest.approx(0.2, abs=1e-15)
    assert tm.circle_dist(0.25, 0.75) == pytest.approx(0.5, abs=1e-15)
    assert tm.circle_dist(0.37, 0.37) == 0.0


def test_circle_dist_symmetry_and_triangle():
    rng = np.random.default_rng(0)
    x, y, z = rng.random((3, 2000))
    dxy = tm.circle_dist(x, y)
    assert np.allclose(dxy, tm.circle_dist(y, x))
    assert np.all(dxy <= 0.5 + 1e-15)
    assert np.all(tm.circle_dist(x, z) <= dxy + tm.circle_dist(y, z) + 1e-12)


def test_grid_function_examples():
    f = GridFunction(np.array([0.0, 1.0]))
    assert f(0.25) == pytest.approx(0.5, abs=1e-15)   # interior segment
    assert f(0.75) == pytest.approx(0.5, abs=1e-15)   # wrap segment back to node 0
    const = GridFunction.constant(3.25, 64)
    assert const(np.random.default_rng(1).random(50)) == pytest.approx(3.25)


def test_grid_function_exact_at_nodes_and_periodic():
    rng = np.random.default_rng(2)
    vals = rng.random(37)
    f = GridFunction(vals)
    nodes = tm.grid_nodes(37)
    assert np.array_equal(f(nodes), vals)
    x = rng.random(100)
    assert np.allclose(f(x), f(x + 1.0), atol=1e-12)


def test_grid_function_respects_modulus_bound():
    # omega(d(x,0)) has seminorm 1 with respect to omega (concave, hence
    # subadditive); interpolation may add at most twice omega(1/N)
    n = 512
    omega = tm.omega_ab(0.75, 0.0)
    f = GridFunction.from_function(lambda t: omega(tm.circle_dist(t, 0.0)), n)
    rng = np.random.default_rng(3)
    x, y = rng.random((2, 4000))
    bound = omega(tm.circle_dist(x, y)) + 2.0 * omega(1.0 / n)
    assert np.all(np.abs(f(x) - f(y)) <= bound + 1e-12)


def test_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.5, -0.1, 0.6]))
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.5, 0.4]))
    m = DiscreteMeasure(np.array([0.5, 0.4]), probability=False)
    assert m.normalized().weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_integrate_examples():
    n = 4096
    ones = GridFunction.constant(1.0, n)
    uniform = DiscreteMeasure.uniform(n)
    assert integrate(ones, uniform) == pytest.approx(1.0, abs=1e-12)

    rng = np.random.default_rng(4)
    f = GridFunction(rng.random(n))
    dirac = DiscreteMeasure.point_mass(17, n)
    assert integrate(f, dirac) == f.values[17]

    cos = GridFunction.from_function(lambda x: np.cos(2 * np.pi * x), n)
    assert abs(integrate(cos, uniform)) <= 1e-10


def test_integrate_is_bilinear():
    n = 256
    rng = np.random.default_rng(5)
    f, g = GridFunction(rng.random(n)), GridFunction(rng.random(n))
    w1, w2 = rng.random(n), rng.random(n)
    m1 = DiscreteMeasure(w1 / w1.sum())
    m2 = DiscreteMeasure(w2 / w2.sum())
    combo = GridFunction(2.0 * f.values - 3.0 * g.values)
    assert integrate(combo, m1) == pytest.approx(
        2.0 * integrate(f, m1) - 3.0 * integrate(g, m1), rel=1e-12)
    mix = DiscreteMeasure(0.25 * m1.weights + 0.75 * m2.weights)
    assert integrate(f, mix) == pytest.approx(
        0.25 * integrate(f, m1) + 0.75 * integrate(f, m2), rel=1e-12)


def test_integrate_resolution_mismatch():
    with pytest.raises(tm.ResolutionMismatchError):
        integrate(GridFunction.constant(1.0, 8), DiscreteMeasure.uniform(16))


def test_arc_mass_pro_rates_boundary_cells():
    m = DiscreteMeasure.uniform(10)
    assert m.arc_mass(0.05, 0.25) == pytest.approx(0.2, abs=1e-14)
    # wrapping arc
    assert m.arc_mass(0.95, 0.05) == pytest.approx(0.1, abs=1e-14)
    # full circle minus a sliver
    assert m.arc_mass(0.001, 0.0) == pytest.approx(0.999, abs=1e-12)
