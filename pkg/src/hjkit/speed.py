"""Direction-dependent speed profiles ``f(a, x)`` for anisotropic control.

A profile wraps a compiled scalar function ``func(a1, a2, x, y)`` giving the
speed of motion in the unit direction ``a = (a1, a2)`` from ``(x, y)``,
together with bounds ``F1 <= f <= F2``.  The ratio ``F2/F1`` fixes the search
radius of the Ordered Upwind Method.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class SpeedProfile:
    func: object
    F1: float
    F2: float
    name: str = "custom"

    def __post_init__(self):
        if not (0 < self.F1 <= self.F2 < np.inf):
            raise ValueError(f"need 0 < F1 <= F2 < inf, got F1={self.F1}, F2={self.F2}")

    @property
    def anisotropy(self) -> float:
        return self.F2 / self.F1

    def evaluate(self, a, x) -> float:
        a1, a2 = float(a[0]), float(a[1])
        r = math.hypot(a1, a2)
        return float(self.func(a1 / r, a2 / r, float(x[0]), float(x[1])))

    def sample(self, points, n_dirs=64) -> np.ndarray:
        """Speeds over ``n_dirs`` directions at each of ``points``; shape (P, n_dirs)."""
        return _sample_speeds(self.func, np.ascontiguousarray(points, dtype=float), n_dirs)

    def check_bounds(self, points, n_dirs=64, rtol=1e-12) -> bool:
        s = self.sample(points, n_dirs)
        return bool(s.min() >= self.F1 * (1 - rtol) and s.max() <= self.F2 * (1 + rtol))

    @classmethod
    def from_function(cls, func, F1=None, F2=None, points=None, name="custom"):
        """Wrap a plain Python ``func(a1, a2, x, y)``; compiled with numba.

        Missing bounds are estimated from ``points`` (see :func:`estimate_bounds`).
        """
        jf = func if hasattr(func, "py_func") else njit(func)
        if F1 is None or F2 is None:
            if points is None:
                raise ValueError("points are required to estimate speed bounds")
            lo, hi = estimate_bounds(jf, points)
            F1 = lo if F1 is None else F1
            F2 = hi if F2 is None else F2
        return cls(jf, float(F1), float(F2), name)


@njit
def _sample_speeds(func, points, n_dirs):
    out = np.empty((points.shape[0], n_dirs))
    for p in range(points.shape[0]):
        for d in range(n_dirs):
            t = 2.0 * math.pi * d / n_dirs
            out[p, d] = func(math.cos(t), math.sin(t), points[p, 0], points[p, 1])
    return out


def estimate_bounds(func, points, n_dirs=64, margin=0.01):
    """Sampled ``(F1, F2)`` widened by ``margin`` so the ratio over-estimates."""
    s = _sample_speeds(func, np.ascontiguousarray(points, dtype=float), n_dirs)
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise ValueError("speed must be finite and positive at every sample")
    return float(s.min()) * (1 - margin), float(s.max()) * (1 + margin)


def isotropic(c=1.0) -> SpeedProfile:
    c = float(c)

    @njit
    def f(a1, a2, x, y):
        return c

    return SpeedProfile(f, c, c, f"isotropic({c:g})")


def elliptic(fx=2.0, fy=1.0) -> SpeedProfile:
    """Homogeneous profile whose speed set is the ellipse with semi-axes ``fx``, ``fy``.

    ``f(a) = 1 / sqrt((a1/fx)**2 + (a2/fy)**2)``.  The speed set is convex,
    so straight rays are optimal and ``u(x) = |x| / f(x/|x|)``.
    """
    ix2, iy2 = 1.0 / float(fx) ** 2, 1.0 / float(fy) ** 2

    @njit
    def f(a1, a2, x, y):
        return 1.0 / math.sqrt(ix2 * a1 * a1 + iy2 * a2 * a2)

    lo, hi = sorted((abs(float(fx)), abs(float(fy))))
    return SpeedProfile(f, lo, hi, f"elliptic({fx:g},{fy:g})")


def peanut(fx=2.0, fy=1.0) -> SpeedProfile:
    """``f(a) = sqrt(fx**2 a1**2 + fy**2 a2**2)``: same axis speeds as
    :func:`elliptic` but a non-convex speed set, so zig-zag paths beat
    straight rays off the axes."""
    fx2, fy2 = float(fx) ** 2, float(fy) ** 2

    @njit
    def f(a1, a2, x, y):
        return math.sqrt(fx2 * a1 * a1 + fy2 * a2 * a2)

    lo, hi = sorted((abs(float(fx)), abs(float(fy))))
    return SpeedProfile(f, lo, hi, f"peanut({fx:g},{fy:g})")


def geodesic_speed(g_x, g_y, omega):
    """Front speed on the graph surface ``z = g(x, y)`` seen in the plane.

    ``omega`` is the angle of the front normal (the direction of ``grad u``)
    and ``g_x``, ``g_y`` the surface slopes.  Works elementwise on arrays.
    """
    g_x = np.asarray(g_x, dtype=float)
    g_y = np.asarray(g_y, dtype=float)
    c = np.cos(omega)
    s = np.sin(omega)
    num = 1.0 + g_y ** 2 * c ** 2 + g_x ** 2 * s ** 2 - g_x * g_y * np.sin(2.0 * omega)
    out = np.sqrt(num / (1.0 + g_x ** 2 + g_y ** 2))
    return out if out.ndim else float(out)


def sin_surface(amp=0.9, freq=1.0):
    """Height ``amp*sin(2 pi freq x) sin(2 pi freq y)`` and its gradient."""
    w = 2.0 * math.pi * freq

    def height(x, y):
        return amp * np.sin(w * x) * np.sin(w * y)

    def gradient(x, y):
        return (amp * w * np.cos(w * x) * np.sin(w * y),
                amp * w * np.sin(w * x) * np.cos(w * y))

    return height, gradient


def sin_manifold(amp=0.9, freq=1.0) -> SpeedProfile:
    """Planar speed of unit-speed motion on ``z = amp sin(2 pi freq x) sin(2 pi freq y)``.

    Moving in the plane direction ``a`` with unit surface speed gives
    ``f(a, x) = 1 / sqrt(1 + (grad g . a)**2)``.  The matching front-normal
    speed is :func:`geodesic_speed`; the two are related by
    ``F(n) = max_a (a . n) f(a)``.
    """
    amp = float(amp)
    w = 2.0 * math.pi * float(freq)
    aw = amp * w

    @njit
    def f(a1, a2, x, y):
        gx = aw * math.cos(w * x) * math.sin(w * y)
        gy = aw * math.sin(w * x) * math.cos(w * y)
        d = gx * a1 + gy * a2
        return 1.0 / math.sqrt(1.0 + d * d)

    F1 = 1.0 / math.sqrt(1.0 + aw * aw)
    return SpeedProfile(f, F1, 1.0, f"sin-manifold({amp:g})")
