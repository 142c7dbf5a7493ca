import math

import numpy as np
import pytest

from hjkit.fmm import EikonalProblem, fmm_local_update, fmm_solve
from hjkit.grid import Grid2D, ScalarField2D

from conftest import assert_one_pass, radial_error

INF = math.inf


def test_one_sided_step():
    assert fmm_local_update(0.0, INF, INF, INF, 0.1, 0.1, 1.0) == pytest.approx(0.1)


def test_symmetric_quadratic():
    assert fmm_local_update(0.0, INF, 0.0, INF, 1.0, 1.0, 1.0) == pytest.approx(1 / math.sqrt(2))


def test_skewed_quadratic():
    U = fmm_local_update(0.0, 3.0, INF, 0.5, 1.0, 1.0, 1.0)
    assert U == pytest.approx((1 + math.sqrt(7)) / 4, abs=1e-12)
    assert abs(U ** 2 + (U - 0.5) ** 2 - 1) < 1e-12


def test_falls_back_when_root_below_neighbour():
    # b is so large that only the x-neighbour is upwind
    assert fmm_local_update(0.0, INF, 5.0, INF, 1.0, 1.0, 1.0) == pytest.approx(1.0)


def test_all_infinite():
    assert fmm_local_update(INF, INF, INF, INF, 1.0, 1.0, 1.0) == INF


def test_anisotropic_spacing_residual():
    hx, hy, F, a, b = 0.2, 0.05, 1.7, 0.1, 0.12
    U = fmm_local_update(a, INF, INF, b, hx, hy, F)
    r = max((U - a) / hx, 0) ** 2 + max((U - b) / hy, 0) ** 2 - 1 / F ** 2
    assert abs(r) < 1e-10


def _centre(n, speed=1.0):
    g = Grid2D(n, n)
    return EikonalProblem.point_source(ScalarField2D.constant(g, speed), 0.5, 0.5)


def test_constant_speed_examples():
    U, stats = fmm_solve(_centre(129), return_stats=True)
    assert U.sample(0.75, 0.5) == pytest.approx(0.25, abs=0.02)
    assert U.sample(0.75, 0.75) == pytest.approx(0.35355, abs=0.02)
    assert_one_pass(stats)


def test_speed_scaling_exact():
    U1, s1 = fmm_solve(_centre(65, 1.0), return_stats=True)
    U2, s2 = fmm_solve(_centre(65, 2.0), return_stats=True)
    assert np.array_equal(U2.values, U1.values / 2)
    assert np.array_equal(s1.order, s2.order)


def test_comparison_principle(rng):
    g = Grid2D(33, 33)
    F = rng.uniform(0.5, 2.0, g.shape)
    G = F * rng.uniform(1.0, 1.5, g.shape)
    U = fmm_solve(EikonalProblem(ScalarField2D(g, F), {0: 0.0})).values
    V = fmm_solve(EikonalProblem(ScalarField2D(g, G), {0: 0.0})).values
    assert np.all(V <= U + 1e-14)


def test_refinement_reduces_error():
    errs = []
    for n in (33, 65, 129):
        g = Grid2D(n, n)
        U = fmm_solve(_centre(n)).values
        errs.append(radial_error(U, g, (0.5, 0.5)))
    assert errs[0] > errs[1] > errs[2]
    assert all(a / b >= 1.4 for a, b in zip(errs, errs[1:]))


def test_boundary_values_held():
    g = Grid2D(9, 9)
    U = fmm_solve(EikonalProblem(ScalarField2D.constant(g, 1.0), {0: 0.3, 80: 0.1})).values.ravel()
    assert U[0] == 0.3 and U[80] == 0.1


def test_rejects_bad_speed():
    g = Grid2D(3, 3)
    with pytest.raises(ValueError):
        EikonalProblem(ScalarField2D(g, np.r_[np.ones(8), -1.0]), {0: 0.0})
    with pytest.raises(ValueError):
        EikonalProblem(ScalarField2D.constant(g, 1.0), {})
