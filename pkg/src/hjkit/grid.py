"""Regular grids, node-valued fields and bilinear sampling.

Node ``(i, j)`` sits at ``(xmin + i*hx, ymin + j*hy)`` and has the flat id
``i + nx*j``.  Field values are stored as arrays of shape ``(ny, nx)`` so that
``values.ravel()`` is in node-id order.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class NodeState(IntEnum):
    FAR = 0
    CONSIDERED = 1
    ACCEPTED = 2


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    xmin: float = 0.0
    xmax: float = 1.0
    ymin: float = 0.0
    ymax: float = 1.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs at least 2 nodes per axis, got {self.nx}x{self.ny}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("grid bounds must satisfy xmax > xmin and ymax > ymin")

    @property
    def hx(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.ymax - self.ymin) / (self.ny - 1)

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def x(self) -> np.ndarray:
        return self.xmin + self.hx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.ymin + self.hy * np.arange(self.ny)

    def node(self, i: int, j: int) -> tuple:
        return (self.xmin + i * self.hx, self.ymin + j * self.hy)

    def index(self, i: int, j: int) -> int:
        return i + self.nx * j

    def ij(self, node_id: int) -> tuple:
        return node_id % self.nx, node_id // self.nx

    def meshgrid(self):
        """Coordinate arrays ``X, Y`` of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def nearest_node(self, x: float, y: float) -> int:
        i = int(round((x - self.xmin) / self.hx))
        j = int(round((y - self.ymin) / self.hy))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise ValueError(f"point ({x}, {y}) lies outside the grid")
        return self.index(i, j)

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax


@dataclass
class ScalarField2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        self.values = v.reshape(self.grid.shape)

    @classmethod
    def from_function(cls, grid: Grid2D, func):
        X, Y = grid.meshgrid()
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape).astype(float))

    @classmethod
    def constant(cls, grid: Grid2D, value: float):
        return cls(grid, np.full(grid.shape, float(value)))

    def __getitem__(self, ij):
        i, j = ij
        return self.values[j, i]

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def sample(self, x: float, y: float) -> float:
        return bilinear_sample(self, (x, y))


def bilinear_weights(grid: Grid2D, x, y):
    """Corner node ids and weights for bilinear interpolation at ``(x, y)``.

    Vectorised over ``x``/``y`` (already inside the grid); returns arrays of
    shape ``(..., 4)``.
    """
    x = np.clip(np.asarray(x, dtype=float), grid.xmin, grid.xmax)
    y = np.clip(np.asarray(y, dtype=float), grid.ymin, grid.ymax)
    sx = (x - grid.xmin) / grid.hx
    sy = (y - grid.ymin) / grid.hy
    i = np.clip(np.floor(sx).astype(np.int64), 0, grid.nx - 2)
    j = np.clip(np.floor(sy).astype(np.int64), 0, grid.ny - 2)
    fx = sx - i
    fy = sy - j
    base = i + grid.nx * j
    ids = np.stack([base, base + 1, base + grid.nx, base + grid.nx + 1], axis=-1)
    w = np.stack([(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy], axis=-1)
    return ids, w


def interpolate(values, ids, w):
    """Weighted sum over the last axis that ignores zero-weight corners
    (so ``inf`` corners only matter when they carry weight)."""
    v = np.asarray(values)[ids]
    with np.errstate(invalid="ignore"):
        return np.where(w > 0, w * v, 0.0).sum(axis=-1)


def bilinear_sample(field: ScalarField2D, x) -> float:
    """Bilinear interpolation of ``field`` at the point ``x = (x, y)``.

    Points up to one grid spacing outside the domain are clamped onto the
    boundary; anything farther raises ``ValueError``.
    """
    g = field.grid
    px, py = float(x[0]), float(x[1])
    if (px < g.xmin - g.hx or px > g.xmax + g.hx
            or py < g.ymin - g.hy or py > g.ymax + g.hy):
        raise ValueError(f"sample point ({px}, {py}) is outside the grid")
    ids, w = bilinear_weights(g, px, py)
    return float(interpolate(field.flat(), ids, w))
