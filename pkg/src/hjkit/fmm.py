"""Fast Marching Method for the isotropic Eikonal equation ``|grad u| F = 1``.

First-order upwind (Godunov) discretisation on a rectangular grid with
per-axis spacing.  Only Accepted neighbours enter the local update.
"""

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid import ScalarField2D, NodeState
from .heap import heap_push, heap_pop
from .stats import SolveStats

FAR, CONSIDERED, ACCEPTED = int(NodeState.FAR), int(NodeState.CONSIDERED), int(NodeState.ACCEPTED)


@dataclass
class EikonalProblem:
    speed: ScalarField2D
    boundary: dict  # node id -> boundary value q

    def __post_init__(self):
        F = self.speed.values
        if not np.all(np.isfinite(F)) or np.any(F <= 0):
            raise ValueError("speed must be finite and strictly positive")
        if not self.boundary:
            raise ValueError("boundary set is empty")
        n = self.speed.grid.size
        for b, q in self.boundary.items():
            if not 0 <= b < n:
                raise ValueError(f"boundary id {b} out of range")
            if not np.isfinite(q):
                raise ValueError("boundary values must be finite")

    @classmethod
    def point_source(cls, speed: ScalarField2D, x: float, y: float):
        return cls(speed, {speed.grid.nearest_node(x, y): 0.0})


@njit(cache=True)
def _quad_update(a, b, hx, hy, F):
    # a, b: upwind neighbour values along x and y (may be inf)
    if a == np.inf and b == np.inf:
        return np.inf
    if a == np.inf:
        return b + hy / F
    if b == np.inf:
        return a + hx / F
    ix = 1.0 / (hx * hx)
    iy = 1.0 / (hy * hy)
    A = ix + iy
    B = -2.0 * (a * ix + b * iy)
    C = a * a * ix + b * b * iy - 1.0 / (F * F)
    disc = B * B - 4.0 * A * C
    if disc >= 0.0:
        U = (-B + math.sqrt(disc)) / (2.0 * A)
        if U >= a and U >= b:
            return U
    return min(a + hx / F, b + hy / F)


def fmm_local_update(u_x_minus, u_x_plus, u_y_minus, u_y_plus, hx, hy, F):
    """Upwind update from the four axis neighbours (``inf`` marks unknown).

    Returns the largest root of
    ``max((U-a)/hx, 0)**2 + max((U-b)/hy, 0)**2 = 1/F**2`` with ``a``, ``b``
    the smaller neighbour per axis.
    """
    if not F > 0:
        raise ValueError("speed must be positive")
    a = min(u_x_minus, u_x_plus)
    b = min(u_y_minus, u_y_plus)
    return float(_quad_update(float(a), float(b), float(hx), float(hy), float(F)))


@njit(cache=True)
def _fmm_kernel(speed, nx, ny, hx, hy, b_ids, b_vals):
    n_nodes = nx * ny
    U = np.full(n_nodes, np.inf)
    state = np.zeros(n_nodes, dtype=np.int8)
    fixed = np.zeros(n_nodes, dtype=np.bool_)
    heap = np.empty(n_nodes, dtype=np.int64)
    pos = np.full(n_nodes, -1, dtype=np.int64)
    keys = np.full(n_nodes, np.inf)
    order = np.empty(n_nodes, dtype=np.int64)
    acc_keys = np.empty(n_nodes)
    violations = 0
    n = 0
    for s in range(len(b_ids)):
        node = b_ids[s]
        if state[node] != FAR:
            violations += 1
        fixed[node] = True
        state[node] = CONSIDERED
        U[node] = b_vals[s]
        n = heap_push(heap, pos, keys, n, node, b_vals[s])
    pops = 0
    nb = np.empty(4, dtype=np.int64)
    while n > 0:
        r, n = heap_pop(heap, pos, keys, n)
        if state[r] != CONSIDERED:
            violations += 1
        state[r] = ACCEPTED
        order[pops] = r
        acc_keys[pops] = keys[r]
        pops += 1
        i = r % nx
        j = r // nx
        m = 0
        if i > 0:
            nb[m] = r - 1
            m += 1
        if i < nx - 1:
            nb[m] = r + 1
            m += 1
        if j > 0:
            nb[m] = r - nx
            m += 1
        if j < ny - 1:
            nb[m] = r + nx
            m += 1
        for q in range(m):
            v = nb[q]
            if state[v] == ACCEPTED or fixed[v]:
                continue
            vi = v % nx
            vj = v // nx
            a = np.inf
            if vi > 0 and state[v - 1] == ACCEPTED:
                a = U[v - 1]
            if vi < nx - 1 and state[v + 1] == ACCEPTED and U[v + 1] < a:
                a = U[v + 1]
            b = np.inf
            if vj > 0 and state[v - nx] == ACCEPTED:
                b = U[v - nx]
            if vj < ny - 1 and state[v + nx] == ACCEPTED and U[v + nx] < b:
                b = U[v + nx]
            cand = _quad_update(a, b, hx, hy, speed[v])
            if state[v] == FAR:
                state[v] = CONSIDERED
            if cand < U[v]:
                U[v] = cand
                n = heap_push(heap, pos, keys, n, v, cand)
    return U, order[:pops], acc_keys[:pops], pops, violations


def fmm_solve(problem: EikonalProblem, return_stats=False):
    """First-arrival travel time ``U`` with ``U = q`` on the boundary nodes."""
    g = problem.speed.grid
    ids = np.array(sorted(problem.boundary), dtype=np.int64)
    vals = np.array([problem.boundary[b] for b in ids], dtype=float)
    t0 = time.perf_counter()
    U, order, keys, pops, viol = _fmm_kernel(
        np.ascontiguousarray(problem.speed.flat()), g.nx, g.ny, g.hx, g.hy, ids, vals)
    field = ScalarField2D(g, U)
    if not return_stats:
        return field
    stats = SolveStats(g.size, int(pops), 0, order, keys, int(viol),
                       unreachable=int(np.count_nonzero(~np.isfinite(U))),
                       wall_time=time.perf_counter() - t0)
    return field, stats
