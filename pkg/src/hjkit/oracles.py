"""Reference answers for checking the solvers.

Nothing here is used by the solvers.  The ray tracer integrates the
characteristic system directly with classical RK4, the shortest-path oracle
is a plain fixed-point (label-correcting) iteration, and ``analytic_value``
collects closed forms.  Sampling of gridded slowness goes through scipy, so
no interpolation code is shared with :mod:`hjkit.escape`.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator


@dataclass
class RayPath:
    samples: np.ndarray   # rows (x, z, theta, u, sigma)
    escaped: bool
    exit_x: float = math.nan
    exit_z: float = math.nan
    exit_theta: float = math.nan
    exit_u: float = math.nan
    exit_sigma: float = math.nan

    @property
    def exit(self):
        return (self.exit_x, self.exit_z), self.exit_theta, self.exit_u, self.exit_sigma


def _slowness_sampler(model):
    """``(x, z) -> (n, n_x, n_z)``: analytic when the model carries it."""
    if model.func is not None and model.grad is not None:
        f, gr = model.func, model.grad

        def sample(x, z):
            gx, gz = gr(x, z)
            return float(f(x, z)), float(gx), float(gz)

        return sample
    g = model.grid
    axes = (g.y, g.x)
    its = [RegularGridInterpolator(axes, a, method="linear", bounds_error=False, fill_value=None)
           for a in (model.n, model.n_x, model.n_z)]

    def sample(x, z):
        p = np.array([[z, x]])
        return tuple(float(it(p)[0]) for it in its)

    return sample


def _rhs(sample, y):
    x, z, th = y[0], y[1], y[2]
    n, nx_, nz_ = sample(x, z)
    c, s = math.cos(th), math.sin(th)
    return np.array([c, s, (nz_ * c - nx_ * s) / n, n])


def _rk4(sample, y, h):
    k1 = _rhs(sample, y)
    k2 = _rhs(sample, y + 0.5 * h * k1)
    k3 = _rhs(sample, y + 0.5 * h * k2)
    k4 = _rhs(sample, y + h * k3)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def trace_ray(model, x0, z0, theta0, step=0.005, max_steps=200000, sigma_tol=1e-10):
    """Integrate a ray from ``(x0, z0)`` leaving in direction ``theta0``.

    The state ``(x, z, theta, u)`` advances in arclength ``sigma`` with fixed
    RK4 steps.  The step that leaves the rectangle is shortened by bisection
    until the crossing is located to ``sigma_tol``.  A ray still inside after
    ``max_steps`` is returned with ``escaped=False``.
    """
    g = model.grid
    if step <= 0:
        raise ValueError("step must be positive")
    if not g.contains(x0, z0):
        raise ValueError("start point outside the domain")
    sample = _slowness_sampler(model)

    def inside(y):
        return g.xmin <= y[0] <= g.xmax and g.ymin <= y[1] <= g.ymax

    y = np.array([x0, z0, theta0, 0.0])
    sigma = 0.0
    rows = [(x0, z0, theta0, 0.0, 0.0)]
    # a start on the wall pointing outward escapes immediately
    c, s = math.cos(theta0), math.sin(theta0)
    if ((x0 <= g.xmin and c < 0) or (x0 >= g.xmax and c > 0)
            or (z0 <= g.ymin and s < 0) or (z0 >= g.ymax and s > 0)):
        return RayPath(np.array(rows), True, x0, z0, theta0 % (2 * math.pi), 0.0, 0.0)
    for _ in range(max_steps):
        y_new = _rk4(sample, y, step)
        if inside(y_new):
            y = y_new
            sigma += step
            rows.append((*y[:3], y[3], sigma))
            continue
        lo, hi = 0.0, step
        while hi - lo > sigma_tol:
            mid = 0.5 * (lo + hi)
            if inside(_rk4(sample, y, mid)):
                lo = mid
            else:
                hi = mid
        y_exit = _rk4(sample, y, hi)
        ex = min(max(y_exit[0], g.xmin), g.xmax)
        ez = min(max(y_exit[1], g.ymin), g.ymax)
        return RayPath(np.array(rows), True, ex, ez, y_exit[2] % (2 * math.pi),
                       y_exit[3], sigma + hi)
    return RayPath(np.array(rows), False)


def bellman_ford_grid(problem=None, *, costs=None, sources=None, max_iter=None):
    """Fixed point of ``U = min(neighbours) + C`` with the sources held fixed.

    Takes a ``DijkstraProblem`` or raw ``costs`` (2D array, rows = j) plus a
    ``{flat id: value}`` mapping, which also allows a single-node grid.
    Returns a 2D array shaped like the costs.
    """
    if problem is not None:
        C = np.asarray(problem.costs.values, dtype=float)
        sources = problem.sources
    else:
        C = np.atleast_2d(np.asarray(costs, dtype=float))
        if not isinstance(sources, dict):
            sources = {int(s): 0.0 for s in sources}
    ny, nx = C.shape
    U = np.full(C.shape, np.inf)
    fixed = np.zeros(C.shape, dtype=bool)
    for s, v in sources.items():
        j, i = divmod(int(s), nx)
        U[j, i] = v
        fixed[j, i] = True
    max_iter = max_iter or (nx * ny + 1)
    for _ in range(max_iter):
        best = np.full(C.shape, np.inf)
        best[:, 1:] = np.minimum(best[:, 1:], U[:, :-1])
        best[:, :-1] = np.minimum(best[:, :-1], U[:, 1:])
        best[1:, :] = np.minimum(best[1:, :], U[:-1, :])
        best[:-1, :] = np.minimum(best[:-1, :], U[1:, :])
        new = np.where(fixed, U, np.minimum(U, best + C))
        if np.array_equal(new, U):
            return U
        U = new
    raise RuntimeError("label-correcting iteration did not settle")


def straight_exit(x, z, theta, bounds=(0.0, 1.0, 0.0, 1.0), n=1.0):
    """Time to leave the rectangle along a straight ray in constant slowness ``n``."""
    xmin, xmax, zmin, zmax = bounds
    if not (xmin <= x <= xmax and zmin <= z <= zmax):
        raise ValueError("query outside the domain")
    c, s = math.cos(theta), math.sin(theta)
    # directions within rounding of an axis count as parallel to it
    c = 0.0 if abs(c) < 1e-12 else c
    s = 0.0 if abs(s) < 1e-12 else s
    t = math.inf
    if c > 0:
        t = min(t, (xmax - x) / c)
    elif c < 0:
        t = min(t, (xmin - x) / c)
    if s > 0:
        t = min(t, (zmax - z) / s)
    elif s < 0:
        t = min(t, (zmin - z) / s)
    return n * t


def exit_obliquity(x, z, theta, bounds=(0.0, 1.0, 0.0, 1.0)):
    """``|R . normal|`` where the straight ray from ``(x, z)`` leaves the rectangle
    (1 for a head-on exit, 0 for a grazing one)."""
    xmin, xmax, zmin, zmax = bounds
    t = straight_exit(x, z, theta, bounds)
    c, s = math.cos(theta), math.sin(theta)
    ex, ez = x + t * c, z + t * s
    dx = min(abs(ex - xmin), abs(ex - xmax))
    dz = min(abs(ez - zmin), abs(ez - zmax))
    if abs(dx - dz) < 1e-12:
        return max(abs(c), abs(s))
    return abs(c) if dx < dz else abs(s)


def analytic_value(kind, query, **kw):
    """Closed-form values.

    * ``"euclidean"``: ``|x - source|``; keyword ``source`` (default origin).
    * ``"homogeneous-anisotropic"``: ``|x| / f(x/|x|)`` with keyword ``f``
      a callable of the unit direction ``(a1, a2)``; optional ``source``.
      Straight rays are optimal only for position-independent profiles.
    * ``"straight-exit"``: query ``(x, z, theta)``, keywords ``bounds``
      ``(xmin, xmax, zmin, zmax)`` and constant slowness ``n``.
    """
    if kind == "euclidean":
        src = np.asarray(kw.get("source", (0.0, 0.0)), dtype=float)
        return float(np.hypot(*(np.asarray(query, dtype=float) - src)))
    if kind == "homogeneous-anisotropic":
        f = kw["f"]
        src = np.asarray(kw.get("source", (0.0, 0.0)), dtype=float)
        d = np.asarray(query, dtype=float) - src
        r = float(np.hypot(*d))
        if r == 0.0:
            return 0.0
        return r / float(f(d[0] / r, d[1] / r))
    if kind == "straight-exit":
        x, z, th = query
        return straight_exit(x, z, th, kw.get("bounds", (0.0, 1.0, 0.0, 1.0)), kw.get("n", 1.0))
    raise ValueError(f"unknown kind {kind!r}; expected euclidean, homogeneous-anisotropic or straight-exit")
