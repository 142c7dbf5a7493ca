"""Named models used by the command line and the demos.

Each model carries a default rectangle and whatever representations the
solvers need: a direction/position speed profile for the Ordered Upwind
Method, and for isotropic models a vectorised slowness ``n(x, z)`` with its
analytic gradient (Fast Marching uses ``1/n``, the escape solver uses ``n``).
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .speed import SpeedProfile, elliptic, isotropic, sin_manifold


@dataclass(frozen=True)
class BuiltinModel:
    name: str
    profile: SpeedProfile
    domain: tuple = (0.0, 1.0, 0.0, 1.0)
    slowness: object = None        # n(x, z), vectorised; None for anisotropic models
    slowness_grad: object = None   # (n_x, n_z)
    description: str = ""

    @property
    def isotropic(self) -> bool:
        return self.slowness is not None

    @property
    def F1(self) -> float:
        return self.profile.F1

    @property
    def F2(self) -> float:
        return self.profile.F2

    def speed(self, x, z):
        if self.slowness is None:
            raise ValueError(f"model {self.name!r} is anisotropic and has no scalar speed")
        return 1.0 / self.slowness(x, z)


def _zeros(x, z):
    z0 = np.zeros(np.broadcast(np.asarray(x), np.asarray(z)).shape)
    return z0, z0.copy()


def _const_slowness():
    return BuiltinModel("const-slowness", isotropic(1.0),
                        slowness=lambda x, z: np.ones(np.broadcast(np.asarray(x), np.asarray(z)).shape),
                        slowness_grad=_zeros,
                        description="n = 1 on the unit square")


def _const_speed():
    m = _const_slowness()
    return BuiltinModel("const-speed", m.profile, slowness=m.slowness, slowness_grad=m.slowness_grad,
                        description="F = 1 on the unit square")


@njit
def _linear_speed(a1, a2, x, y):
    return 1.0 / (1.0 + 0.5 * y)


def _linear_slowness():
    def n(x, z):
        return 1.0 + 0.5 * np.asarray(z, dtype=float) + 0.0 * np.asarray(x, dtype=float)

    def grad(x, z):
        zx, _ = _zeros(x, z)
        return zx, zx + 0.5

    return BuiltinModel("linear-slowness", SpeedProfile(_linear_speed, 1.0 / 1.5, 1.0, "linear-slowness"),
                        slowness=n, slowness_grad=grad,
                        description="n = 1 + z/2 on the unit square")


@njit
def _waveguide_speed(a1, a2, x, y):
    return 1.0 + 0.8 * math.exp(-25.0 * (y - 0.5) ** 2)


def _waveguide():
    def n(x, z):
        z = np.asarray(z, dtype=float) + 0.0 * np.asarray(x, dtype=float)
        return 1.0 / (1.0 + 0.8 * np.exp(-25.0 * (z - 0.5) ** 2))

    def grad(x, z):
        z = np.asarray(z, dtype=float) + 0.0 * np.asarray(x, dtype=float)
        e = np.exp(-25.0 * (z - 0.5) ** 2)
        return np.zeros_like(z), 40.0 * (z - 0.5) * e / (1.0 + 0.8 * e) ** 2

    return BuiltinModel("waveguide", SpeedProfile(_waveguide_speed, 1.0, 1.8, "waveguide"),
                        slowness=n, slowness_grad=grad,
                        description="n = 1/(1 + 0.8 exp(-25 (z - 1/2)^2)): fast channel at z = 1/2")


def _ellipse2():
    return BuiltinModel("ellipse-2", elliptic(2.0, 1.0), domain=(-1.0, 1.0, -1.0, 1.0),
                        description="homogeneous, speed 2 along x and 1 along y (convex ellipse)")


def _sin_manifold():
    return BuiltinModel("sin-manifold", sin_manifold(0.9, 1.0), domain=(-0.5, 0.5, -0.5, 0.5),
                        description="geodesic distance on z = 0.9 sin(2 pi x) sin(2 pi y)")


_FACTORIES = {
    "const-speed": _const_speed,
    "const-slowness": _const_slowness,
    "linear-slowness": _linear_slowness,
    "waveguide": _waveguide,
    "ellipse-2": _ellipse2,
    "sin-manifold": _sin_manifold,
}

MODEL_NAMES = tuple(sorted(_FACTORIES))


def builtin_model(name: str) -> BuiltinModel:
    try:
        return _FACTORIES[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; available: {', '.join(MODEL_NAMES)}") from None
