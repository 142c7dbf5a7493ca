"""Label-setting shortest paths on the 4-neighbour grid network.

Each node carries a positive cost ``C`` charged on entry, and the minimal
total cost obeys ``U = min(U_left, U_right, U_down, U_up) + C`` away from
the sources.  As the grid is refined this converges to a Manhattan-type
metric rather than the Euclidean Eikonal solution, which is what makes it a
useful counterexample next to :mod:`hjkit.fmm`.
"""

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid import ScalarField2D, NodeState
from .heap import heap_push, heap_pop
from .stats import SolveStats

FAR, CONSIDERED, ACCEPTED = int(NodeState.FAR), int(NodeState.CONSIDERED), int(NodeState.ACCEPTED)


@dataclass
class DijkstraProblem:
    costs: ScalarField2D
    sources: dict  # node id -> initial value

    def __post_init__(self):
        c = self.costs.values
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("Dijkstra costs must be finite and strictly positive")
        if not isinstance(self.sources, dict):
            self.sources = {int(s): 0.0 for s in self.sources}
        if not self.sources:
            raise ValueError("at least one source node is required")
        n = self.costs.grid.size
        for s, v in self.sources.items():
            if not 0 <= s < n:
                raise ValueError(f"source id {s} out of range")
            if not np.isfinite(v):
                raise ValueError("source values must be finite")

    def source_arrays(self):
        ids = np.array(sorted(self.sources), dtype=np.int64)
        vals = np.array([self.sources[s] for s in ids], dtype=float)
        return ids, vals


@njit(cache=True)
def _dijkstra_kernel(cost, nx, ny, src_ids, src_vals):
    n_nodes = nx * ny
    U = np.full(n_nodes, np.inf)
    state = np.zeros(n_nodes, dtype=np.int8)
    is_src = np.zeros(n_nodes, dtype=np.bool_)
    heap = np.empty(n_nodes, dtype=np.int64)
    pos = np.full(n_nodes, -1, dtype=np.int64)
    keys = np.full(n_nodes, np.inf)
    order = np.empty(n_nodes, dtype=np.int64)
    acc_keys = np.empty(n_nodes)
    violations = 0
    n = 0
    for s in range(len(src_ids)):
        node = src_ids[s]
        is_src[node] = True
        U[node] = src_vals[s]
        if state[node] != FAR:
            violations += 1
        state[node] = CONSIDERED
        n = heap_push(heap, pos, keys, n, node, src_vals[s])
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
            if state[v] == ACCEPTED or is_src[v]:
                continue
            cand = U[r] + cost[v]
            if state[v] == FAR:
                state[v] = CONSIDERED
            if cand < U[v]:
                U[v] = cand
                n = heap_push(heap, pos, keys, n, v, cand)
    return U, order[:pops], acc_keys[:pops], pops, violations


def dijkstra_solve(problem: DijkstraProblem, return_stats=False):
    """Minimal total cost ``U`` on the grid network of ``problem``."""
    g = problem.costs.grid
    ids, vals = problem.source_arrays()
    t0 = time.perf_counter()
    U, order, keys, pops, viol = _dijkstra_kernel(
        np.ascontiguousarray(problem.costs.flat()), g.nx, g.ny, ids, vals)
    field = ScalarField2D(g, U)
    if not return_stats:
        return field
    stats = SolveStats(g.size, int(pops), 0, order, keys, int(viol),
                       unreachable=int(np.count_nonzero(~np.isfinite(U))),
                       wall_time=time.perf_counter() - t0)
    return field, stats
