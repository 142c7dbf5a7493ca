import math

import numpy as np
import pytest

from hjkit.grid import Grid2D
from hjkit.mesh import mesh_from_grid
from hjkit.oracles import analytic_value
from hjkit.oum import (AcceptedFront, OUMProblem, neighborhood_counts, nf_segments, oum_solve,
                       oum_solve_reference, oum_update_K, segment_distance)
from hjkit.speed import elliptic, isotropic, peanut, sin_manifold

from conftest import assert_one_pass, radial_error


def dense_K(Uj, Uk, xi, xj, xk, f, n=1_000_000):
    z = np.linspace(0.0, 1.0, n)
    xz = z[:, None] * np.asarray(xj, float) + (1 - z[:, None]) * np.asarray(xk, float)
    d = xz - np.asarray(xi, float)
    r = np.hypot(d[:, 0], d[:, 1])
    return float(np.min(r / f(d[:, 0] / r, d[:, 1] / r) + z * Uj + (1 - z) * Uk))


def test_K_isotropic_perpendicular():
    assert oum_update_K(0, 0, (0.5, 0.5), (0, 0), (1, 0), isotropic()) == pytest.approx(0.5, abs=1e-9)


def test_K_unequal_values_against_dense_sampling():
    got = oum_update_K(0, 10, (0.5, 0.5), (0, 0), (1, 0), isotropic())
    ref = dense_K(0, 10, (0.5, 0.5), (0, 0), (1, 0), lambda a1, a2: 1.0)
    assert got == pytest.approx(ref, abs=1e-6)
    assert got == pytest.approx(math.hypot(0.5, 0.5), abs=1e-9)


def test_K_ellipse_straight_down():
    e = elliptic(2, 1)
    got = oum_update_K(0, 0, (0, 0.5), (-1, 0), (1, 0), e)
    ref = dense_K(0, 0, (0, 0.5), (-1, 0), (1, 0), lambda a1, a2: 1 / np.sqrt(a1 ** 2 / 4 + a2 ** 2))
    assert got == pytest.approx(0.5, abs=1e-9)
    assert ref == pytest.approx(0.5, abs=1e-6)


def test_K_peanut_prefers_slanted_path():
    # the non-convex speed set makes a slanted path beat the straight drop
    got = oum_update_K(0, 0, (0, 0.5), (-1, 0), (1, 0), peanut(2, 1))
    ref = dense_K(0, 0, (0, 0.5), (-1, 0), (1, 0), lambda a1, a2: np.sqrt(4 * a1 ** 2 + a2 ** 2))
    assert got == pytest.approx(ref, abs=1e-6)
    assert got == pytest.approx(math.sqrt(3) / 4, abs=1e-6)


@pytest.mark.parametrize("V,F", [(0.0, 1.0), (2.5, 3.0), (1.0, 0.25)])
def test_K_consistency(V, F, rng):
    for _ in range(10):
        xi, xj, xk = rng.uniform(-1, 1, (3, 2))
        got = oum_update_K(V, V, xi, xj, xk, isotropic(F))
        assert got == pytest.approx(V + segment_distance(xi, xj, xk) / F, abs=1e-9)


def test_K_degenerate_segment():
    got = oum_update_K(1.0, 1.0, (0, 0), (3, 4), (3, 4), isotropic(2.0))
    assert got == pytest.approx(1.0 + 5.0 / 2.0)


def _front_from(segs, verts, cell):
    f = AcceptedFront(verts, cell)
    for j, k in segs:
        f.add(j, k)
    return f


def test_nf_isotropic_ring():
    g = Grid2D(5, 5)
    m = mesh_from_grid(g)
    c = g.index(2, 2)
    ring = m.neighbors(c)
    segs = [(a, b) for a in ring for b in ring if a < b and b in m.neighbors(a)]
    front = _front_from(segs, m.vertices, m.diameter)
    assert nf_segments(front, c, m.diameter, 1.0) == sorted(segs)


def test_nf_excludes_far_segment():
    V = np.array([[0.0, 0.0], [5.0, 5.0], [6.0, 5.0]])
    front = _front_from([(1, 2)], V, 1.0)
    assert nf_segments(front, 0, 1.0, 2.0) == []


def test_nf_random_front_matches_brute_force(rng):
    V = rng.uniform(0, 4, (100, 2))
    segs = set()
    while len(segs) < 50:
        a, b = sorted(rng.choice(100, 2, replace=False))
        if np.hypot(*(V[a] - V[b])) < 0.6:
            segs.add((int(a), int(b)))
    h, ups = 0.4, 2.0
    front = _front_from(segs, V, h * ups)
    for _ in range(30):
        x = rng.uniform(0, 4, 2)
        brute = sorted(s for s in segs if segment_distance(x, V[s[0]], V[s[1]]) <= h * ups)
        assert nf_segments(front, x, h, ups) == brute


def _origin_problem(n, prof, lo=-1.0, hi=1.0):
    g = Grid2D(n, n, lo, hi, lo, hi)
    m = mesh_from_grid(g)
    return g, OUMProblem.point_source(m, prof, 0.0, 0.0)


def test_isotropic_distance():
    g, prob = _origin_problem(65, isotropic())
    U, stats = oum_solve(prob, return_stats=True)
    assert radial_error(U, g) <= 0.05
    assert_one_pass(stats)


def test_ellipse_axis_values_and_rays():
    e = elliptic(2, 1)
    g, prob = _origin_problem(65, e)
    U, stats = oum_solve(prob, return_stats=True)
    Ug = U.reshape(g.shape)
    assert Ug[32, 48] == pytest.approx(0.25, abs=0.05)
    assert Ug[48, 32] == pytest.approx(0.5, abs=0.05)
    X, Y = g.meshgrid()
    f = lambda a1, a2: e.evaluate((a1, a2), (0, 0))
    ref = np.array([analytic_value("homogeneous-anisotropic", (x, y), f=f) for x, y in zip(X.ravel(), Y.ravel())])
    far = np.hypot(X, Y).ravel() > 2 * math.sqrt(2) * g.hx
    assert np.max(np.abs(U - ref)[far]) <= 0.05
    assert_one_pass(stats)


def test_recomputes_bounded_by_neighbourhood():
    g, prob = _origin_problem(33, elliptic(2, 1))
    U, stats = oum_solve(prob, return_stats=True)
    counts = neighborhood_counts(prob.mesh, stats.extra["radius"])
    assert np.all(stats.extra["recompute_per_vertex"] <= counts)
    ups = stats.extra["F2"] / stats.extra["F1"]
    assert stats.recomputes <= prob.mesh.n_vertices * (math.pi * (ups + 1) ** 2 * 4)


@pytest.mark.parametrize("prof", [isotropic(), elliptic(2, 1), sin_manifold()], ids=["iso", "ellipse", "sin"])
def test_compiled_matches_stepwise_reference(prof):
    lo = -0.5 if prof.name.startswith("sin") else -1.0
    g, prob = _origin_problem(13, prof, lo, -lo)
    U, stats = oum_solve(prob, return_stats=True)
    R, info = oum_solve_reference(prob, audit=True)
    assert np.max(np.abs(U - R)) < 1e-12
    assert info["audit_outside"] == 0
    assert_one_pass(stats)


def test_sin_manifold_lower_bound_and_refinement():
    prof = sin_manifold()
    sols = {}
    for n in (33, 129):
        g, prob = _origin_problem(n, prof, -0.5, 0.5)
        U, stats = oum_solve(prob, return_stats=True)
        assert_one_pass(stats)
        X, Y = g.meshgrid()
        # unit surface speed and planar distance never exceeds surface distance
        assert np.all(U >= np.hypot(X, Y).ravel() - 1e-12)
        sols[n] = U.reshape(g.shape)
    coarse = sols[33]
    fine = sols[129][::4, ::4]
    h = math.sqrt(2) / 32
    assert np.max(np.abs(coarse - fine)) <= 2 * h


def test_unreachable_vertex_stays_infinite():
    from hjkit.mesh import SimplicialMesh
    V = np.array([[0, 0], [1, 0], [0, 1], [5, 5], [6, 5], [5, 6]], float)
    T = np.array([[0, 1, 2], [3, 4, 5]])
    U, stats = oum_solve(OUMProblem(SimplicialMesh(V, T), isotropic(), {0: 0.0}), return_stats=True)
    assert np.all(np.isinf(U[3:])) and stats.unreachable == 3
    assert_one_pass(stats)
