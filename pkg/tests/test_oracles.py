import math

import numpy as np
import pytest

from hjkit.escape import SlownessModel
from hjkit.grid import Grid2D
from hjkit.oracles import analytic_value, bellman_ford_grid, exit_obliquity, straight_exit, trace_ray


def linear(g, analytic=True):
    if analytic:
        return SlownessModel.from_function(g, lambda x, z: 1 + 0.5 * z + 0 * x,
                                           lambda x, z: (0 * x, 0 * x + 0.5))
    X, Z = g.meshgrid()
    return SlownessModel(g, 1 + 0.5 * Z)


def test_straight_ray_exits():
    one = SlownessModel.constant(Grid2D(11, 11))
    r = trace_ray(one, 0.5, 0.5, 0.0, 0.01)
    assert r.escaped and r.exit_x == pytest.approx(1.0) and r.exit_z == pytest.approx(0.5)
    assert r.exit_u == pytest.approx(0.5, abs=1e-9)
    r = trace_ray(one, 0.5, 0.5, math.pi / 4, 0.01)
    assert r.exit_u == pytest.approx(math.sqrt(2) / 2, abs=1e-9)


def test_path_samples():
    r = trace_ray(linear(Grid2D(11, 11)), 0.1, 0.5, 0.3, 0.02)
    s = r.samples
    assert np.all(np.diff(s[:, 3]) > 0)
    assert np.allclose(np.diff(s[:, 4]), 0.02)
    assert r.exit_sigma >= s[-1, 4]


def test_fourth_order_self_convergence():
    m = linear(Grid2D(11, 11))
    T = [trace_ray(m, 0.0, 0.5, 0.0, d).exit_u for d in (0.1, 0.05, 0.025)]
    ratio = abs(T[0] - T[1]) / abs(T[1] - T[2])
    assert ratio > 12


def test_gridded_model_close_to_analytic():
    g = Grid2D(41, 41)
    a = trace_ray(linear(g), 0.0, 0.3, 0.4, 0.01)
    b = trace_ray(linear(g, analytic=False), 0.0, 0.3, 0.4, 0.01)
    assert b.exit_u == pytest.approx(a.exit_u, rel=1e-6)


def test_step_budget_reports_trapped_ray():
    r = trace_ray(SlownessModel.constant(Grid2D(11, 11)), 0.5, 0.5, 0.0, 0.01, max_steps=3)
    assert not r.escaped and math.isnan(r.exit_u)


def test_outward_start_on_wall():
    r = trace_ray(SlownessModel.constant(Grid2D(5, 5)), 1.0, 0.5, 0.1)
    assert r.escaped and r.exit_u == 0.0


def test_ray_input_checks():
    m = SlownessModel.constant(Grid2D(5, 5))
    with pytest.raises(ValueError):
        trace_ray(m, 2.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        trace_ray(m, 0.5, 0.5, 0.0, step=0.0)


def test_label_correcting_manhattan():
    U = bellman_ford_grid(costs=np.ones((4, 6)), sources=[0])
    i, j = np.meshgrid(np.arange(6), np.arange(4))
    assert np.array_equal(U, (i + j).astype(float))


def test_analytic_examples():
    assert analytic_value("euclidean", (3, 4)) == 5.0
    f = lambda a1, a2: math.sqrt(4 * a1 ** 2 + a2 ** 2)
    assert analytic_value("homogeneous-anisotropic", (0.5, 0.0), f=f) == pytest.approx(0.25)
    assert analytic_value("straight-exit", (0.5, 0.5, 0.0)) == 0.5
    assert analytic_value("straight-exit", (0.5, 0.5, 0.0), n=3.0) == 1.5
    with pytest.raises(ValueError):
        analytic_value("straight-exit", (1.5, 0.5, 0.0))
    with pytest.raises(ValueError):
        analytic_value("spherical", (0, 0))


def two_leg_min(x, f, n=400):
    """Best time over broken paths 0 -> p -> x with p on a fine grid."""
    t = np.linspace(-1.5, 1.5, n)
    P = np.stack(np.meshgrid(t, t), -1).reshape(-1, 2)
    def leg(d):
        r = np.hypot(d[:, 0], d[:, 1])
        r = np.where(r == 0, 1e-300, r)
        return r / f(d[:, 0] / r, d[:, 1] / r)
    return float(np.min(leg(P) + leg(np.asarray(x) - P)))


def test_straight_rays_optimal_only_for_convex_speed_sets():
    ell = lambda a1, a2: 1 / np.sqrt(a1 ** 2 / 4 + a2 ** 2)
    pea = lambda a1, a2: np.sqrt(4 * a1 ** 2 + a2 ** 2)
    x = (0.4, 0.7)
    straight_e = analytic_value("homogeneous-anisotropic", x, f=lambda a, b: float(ell(a, b)))
    assert two_leg_min(x, ell) >= straight_e - 1e-9
    y = (0.0, 0.5)
    straight_p = analytic_value("homogeneous-anisotropic", y, f=lambda a, b: float(pea(a, b)))
    assert straight_p == pytest.approx(0.5)
    assert two_leg_min(y, pea) < 0.44


def test_obliquity():
    assert exit_obliquity(0.5, 0.5, 0.0) == pytest.approx(1.0)
    assert exit_obliquity(0.5, 0.5, math.atan2(0.5, 0.05)) == pytest.approx(math.sin(math.atan2(0.5, 0.05)))
    assert straight_exit(0.2, 1.0, math.pi) == pytest.approx(0.2)
