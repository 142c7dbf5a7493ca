import math

import numpy as np
import pytest

from hjkit.speed import (SpeedProfile, elliptic, estimate_bounds, geodesic_speed, isotropic, peanut,
                         sin_manifold, sin_surface)


def first_form_speed(gx, gy, omega):
    """Front-normal speed from the metric of the embedded surface (x, y, g)."""
    Xx = np.array([1.0, 0.0, gx])
    Xy = np.array([0.0, 1.0, gy])
    I = np.array([[Xx @ Xx, Xx @ Xy], [Xy @ Xx, Xy @ Xy]])
    n = np.array([math.cos(omega), math.sin(omega)])
    return math.sqrt(n @ np.linalg.solve(I, n))


def test_flat_point():
    for w in np.linspace(0, 2 * math.pi, 7):
        assert geodesic_speed(0.0, 0.0, w) == pytest.approx(1.0)


def test_steep_examples():
    gy = 1.8 * math.pi
    assert geodesic_speed(0.0, gy, 0.0) == pytest.approx(1.0)
    assert geodesic_speed(0.0, gy, math.pi / 2) == pytest.approx(1 / math.sqrt(1 + gy ** 2))
    assert geodesic_speed(0.0, gy, math.pi / 2) == pytest.approx(0.174137, abs=1e-6)


def test_matches_surface_metric(rng):
    gx, gy = rng.normal(0, 3, (2, 200))
    w = rng.uniform(0, 2 * math.pi, 200)
    got = geodesic_speed(gx, gy, w)
    ref = [first_form_speed(a, b, c) for a, b, c in zip(gx, gy, w)]
    assert np.max(np.abs(got - ref)) < 1e-12


def test_ray_speed_is_dual_of_front_speed(rng):
    prof = sin_manifold()
    _, grad = sin_surface()
    t = np.linspace(0, 2 * math.pi, 20001)
    a1, a2 = np.cos(t), np.sin(t)
    for _ in range(20):
        x, y = rng.uniform(-0.5, 0.5, 2)
        gx, gy = grad(x, y)
        w = rng.uniform(0, 2 * math.pi)
        f = np.array([prof.func(p, q, x, y) for p, q in zip(a1[::10], a2[::10])])
        proj = (a1[::10] * math.cos(w) + a2[::10] * math.sin(w)) * f
        assert proj.max() == pytest.approx(geodesic_speed(gx, gy, w), rel=1e-4)


def test_sin_manifold_bounds():
    prof = sin_manifold()
    pts = np.random.default_rng(3).uniform(-1, 1, (300, 2))
    assert prof.check_bounds(pts)
    assert prof.F1 == pytest.approx(1 / math.sqrt(1 + (1.8 * math.pi) ** 2))
    assert prof.F2 == 1.0


def test_ellipse_and_peanut_share_axes_not_diagonals():
    e, p = elliptic(2, 1), peanut(2, 1)
    assert (e.F1, e.F2) == (1.0, 2.0) == (p.F1, p.F2)
    for a in [(1, 0), (0, 1), (-1, 0)]:
        assert e.evaluate(a, (0, 0)) == pytest.approx(p.evaluate(a, (0, 0)))
    d = (1, 1)
    assert e.evaluate(d, (0, 0)) < p.evaluate(d, (0, 0))


def test_ellipse_speed_set_is_ellipse():
    e = elliptic(2, 1)
    for t in np.linspace(0, math.pi, 9):
        f = e.evaluate((math.cos(t), math.sin(t)), (0, 0))
        x, y = f * math.cos(t), f * math.sin(t)
        assert (x / 2) ** 2 + y ** 2 == pytest.approx(1.0)


def test_estimated_bounds_enclose_samples():
    e = elliptic(3, 1)
    lo, hi = estimate_bounds(e.func, np.zeros((1, 2)))
    assert lo < 1.0 and hi > 3.0 and hi / lo < 3.1


def test_bad_bounds_rejected():
    with pytest.raises(ValueError):
        SpeedProfile(isotropic(1).func, 2.0, 1.0)
    with pytest.raises(ValueError):
        SpeedProfile(isotropic(1).func, 0.0, 1.0)


def test_from_plain_function():
    prof = SpeedProfile.from_function(lambda a1, a2, x, y: 1.0 + 0.5 * a1 * a1, points=np.zeros((1, 2)))
    assert prof.F1 <= 1.0 and prof.F2 >= 1.5
