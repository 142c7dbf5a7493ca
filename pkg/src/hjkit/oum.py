"""Ordered Upwind Method for anisotropic min-time control problems.

Solves ``max_a { (grad u . (-a)) f(a, x) } = 1`` with ``u = q`` on a boundary
vertex set, on a triangulated planar mesh.  The Considered vertex ``x_i`` is
updated only from Accepted-front segments lying within ``h * F2/F1`` of it,
where ``h`` is the mesh diameter.

Two solvers are provided: :func:`oum_solve`, a compiled kernel in which the
accepted front is implicit (an edge is on the front while one of its
triangles still has a non-Accepted apex), and :func:`oum_solve_reference`,
a slow step-by-step version built on :class:`AcceptedFront` that can also
audit the search radius.
"""

import math
import time
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid import NodeState
from .heap import heap_push, heap_pop, IndexedMinHeap
from .mesh import SimplicialMesh
from .speed import SpeedProfile, estimate_bounds
from .stats import SolveStats

FAR, CONSIDERED, ACCEPTED = int(NodeState.FAR), int(NodeState.CONSIDERED), int(NodeState.ACCEPTED)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class OUMProblem:
    mesh: SimplicialMesh
    speed: SpeedProfile
    boundary: dict  # vertex id -> exit penalty q

    def __post_init__(self):
        if not self.boundary:
            raise ValueError("boundary set is empty")
        for b, q in self.boundary.items():
            if not 0 <= b < self.mesh.n_vertices:
                raise ValueError(f"boundary vertex {b} out of range")
            if not np.isfinite(q):
                raise ValueError("boundary values must be finite")

    @classmethod
    def point_source(cls, mesh, speed, x, y, q=0.0):
        return cls(mesh, speed, {mesh.nearest_vertex(x, y): float(q)})


# ---------------------------------------------------------------------------
# local update

@njit
def _phi(z, Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid):
    px = z * xj + (1.0 - z) * xk
    py = z * yj + (1.0 - z) * yk
    dx = px - xi
    dy = py - yi
    d = math.sqrt(dx * dx + dy * dy)
    base = z * Uj + (1.0 - z) * Uk
    if d == 0.0:
        return base
    return d / func(dx / d, dy / d, xi + mid * dx, yi + mid * dy) + base


@njit
def _update_K(Uj, Uk, xi, yi, xj, yj, xk, yk, func, tol, mid):
    if xj == xk and yj == yk:
        return _phi(1.0, Uj, Uj, xi, yi, xj, yj, xj, yj, func, mid)
    best = min(_phi(0.0, Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid),
               _phi(1.0, Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid))
    a = 0.0
    b = 1.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = _phi(c, Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid)
    fd = _phi(d, Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid)
    while b - a > tol:
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - _INVPHI * (b - a)
            fc = _phi(c, Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INVPHI * (b - a)
            fd = _phi(d, Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid)
    fm = _phi(0.5 * (a + b), Uj, Uk, xi, yi, xj, yj, xk, yk, func, mid)
    return min(best, fc, fd, fm)


def oum_update_K(U_j, U_k, x_i, x_j, x_k, speed: SpeedProfile, tol=1e-9, mid=0.5) -> float:
    """Semi-Lagrangian segment update.

    Minimises ``|x_i - x_z| / f(a_z, p_z) + z U_j + (1-z) U_k`` over
    ``x_z = z x_j + (1-z) x_k``, ``z in [0, 1]``, with ``a_z`` the unit vector
    from ``x_i`` to ``x_z`` and the speed sampled at
    ``p_z = x_i + mid (x_z - x_i)``.  ``mid=0`` freezes the speed at ``x_i``;
    the default midpoint rule is markedly more accurate when ``f`` varies in
    space.  Golden-section search with both endpoints included.
    """
    if not (np.isfinite(U_j) and np.isfinite(U_k)):
        raise ValueError("segment values must be finite")
    return float(_update_K(float(U_j), float(U_k), float(x_i[0]), float(x_i[1]),
                           float(x_j[0]), float(x_j[1]), float(x_k[0]), float(x_k[1]),
                           speed.func, tol, mid))


@njit(cache=True)
def _seg_dist(px, py, ax, ay, bx, by):
    ex = bx - ax
    ey = by - ay
    L2 = ex * ex + ey * ey
    t = 0.0
    if L2 > 0.0:
        t = ((px - ax) * ex + (py - ay) * ey) / L2
        t = min(max(t, 0.0), 1.0)
    dx = ax + t * ex - px
    dy = ay + t * ey - py
    return math.sqrt(dx * dx + dy * dy)


def segment_distance(p, a, b) -> float:
    return float(_seg_dist(float(p[0]), float(p[1]), float(a[0]), float(a[1]),
                           float(b[0]), float(b[1])))


# ---------------------------------------------------------------------------
# explicit accepted front (reference path and nf_segments)

class AcceptedFront:
    """Set of front segments with a uniform spatial hash for radius queries."""

    def __init__(self, vertices, cell_size):
        self.vertices = np.asarray(vertices, dtype=float)
        self.cell = float(cell_size)
        self.segments = set()
        self._hash = defaultdict(set)

    def _cells(self, j, k):
        p, q = self.vertices[j], self.vertices[k]
        i0 = int(math.floor(min(p[0], q[0]) / self.cell))
        i1 = int(math.floor(max(p[0], q[0]) / self.cell))
        j0 = int(math.floor(min(p[1], q[1]) / self.cell))
        j1 = int(math.floor(max(p[1], q[1]) / self.cell))
        return [(a, b) for a in range(i0, i1 + 1) for b in range(j0, j1 + 1)]

    def add(self, j, k):
        seg = (min(j, k), max(j, k))
        if seg in self.segments:
            return
        self.segments.add(seg)
        for c in self._cells(*seg):
            self._hash[c].add(seg)

    def remove(self, j, k):
        seg = (min(j, k), max(j, k))
        if seg not in self.segments:
            return
        self.segments.discard(seg)
        for c in self._cells(*seg):
            self._hash[c].discard(seg)

    def __len__(self):
        return len(self.segments)

    def __contains__(self, seg):
        j, k = seg
        return (min(j, k), max(j, k)) in self.segments

    def candidates(self, x, radius):
        """Superset of segments that may come within ``radius`` of ``x``."""
        x0, y0 = float(x[0]), float(x[1])
        i0 = int(math.floor((x0 - radius) / self.cell))
        i1 = int(math.floor((x0 + radius) / self.cell))
        j0 = int(math.floor((y0 - radius) / self.cell))
        j1 = int(math.floor((y0 + radius) / self.cell))
        out = set()
        for a in range(i0, i1 + 1):
            for b in range(j0, j1 + 1):
                s = self._hash.get((a, b))
                if s:
                    out |= s
        return out

    @staticmethod
    def edge_is_live(mesh, state, e):
        for ap in mesh.apex[e]:
            if ap >= 0 and state[ap] != ACCEPTED:
                return True
        return False

    def refresh_vertex(self, mesh, state, r):
        """Front maintenance after ``r`` is accepted."""
        for v in [r, *mesh.neighbors(r)]:
            if state[v] != ACCEPTED:
                continue
            for e in range(mesh.nbr_ptr[v], mesh.nbr_ptr[v + 1]):
                m = mesh.nbr_idx[e]
                if state[m] != ACCEPTED:
                    continue
                if self.edge_is_live(mesh, state, e):
                    self.add(v, m)
                else:
                    self.remove(v, m)

    @classmethod
    def from_state(cls, mesh, state, cell_size):
        front = cls(mesh.vertices, cell_size)
        for v in np.flatnonzero(np.asarray(state) == ACCEPTED):
            for e in range(mesh.nbr_ptr[v], mesh.nbr_ptr[v + 1]):
                m = mesh.nbr_idx[e]
                if m > v and state[m] == ACCEPTED and cls.edge_is_live(mesh, state, e):
                    front.add(v, m)
        return front


def nf_segments(front: AcceptedFront, x_i, h, ratio):
    """Front segments with a point within ``h * ratio`` of ``x_i``.

    ``x_i`` is a position or a vertex id of ``front.vertices``.
    """
    if np.ndim(x_i) == 0:
        x_i = front.vertices[int(x_i)]
    radius = h * ratio
    out = []
    for j, k in front.candidates(x_i, radius):
        if segment_distance(x_i, front.vertices[j], front.vertices[k]) <= radius:
            out.append((j, k))
    return sorted(out)


# ---------------------------------------------------------------------------
# compiled solver

def _bucket_vertices(vertices, cell):
    lo = vertices.min(axis=0)
    idx = np.floor((vertices - lo) / cell).astype(np.int64)
    bnx, bny = int(idx[:, 0].max()) + 1, int(idx[:, 1].max()) + 1
    b = idx[:, 0] + bnx * idx[:, 1]
    order = np.argsort(b, kind="stable").astype(np.int64)
    ptr = np.zeros(bnx * bny + 1, dtype=np.int64)
    np.add.at(ptr, b + 1, 1)
    return lo, bnx, bny, np.cumsum(ptr), order


@njit
def _is_live(e, apex, state):
    a0 = apex[e, 0]
    a1 = apex[e, 1]
    return (a0 >= 0 and state[a0] != ACCEPTED) or (a1 >= 0 and state[a1] != ACCEPTED)


@njit
def _is_front_vertex(v, nbr_ptr, nbr_idx, state):
    for e in range(nbr_ptr[v], nbr_ptr[v + 1]):
        if state[nbr_idx[e]] != ACCEPTED:
            return True
    return False


@njit
def _gather(xi, yi, radius, V, lo, cell, bnx, bny, bptr, bidx, out):
    """Vertices within ``radius`` of (xi, yi); returns count written to ``out``."""
    ci = int(math.floor((xi - lo[0]) / cell))
    cj = int(math.floor((yi - lo[1]) / cell))
    r2 = radius * radius
    m = 0
    for bj in range(max(cj - 1, 0), min(cj + 2, bny)):
        for bi in range(max(ci - 1, 0), min(ci + 2, bnx)):
            b = bi + bnx * bj
            for t in range(bptr[b], bptr[b + 1]):
                v = bidx[t]
                dx = V[v, 0] - xi
                dy = V[v, 1] - yi
                if dx * dx + dy * dy <= r2:
                    out[m] = v
                    m += 1
    return m


@njit
def _full_scan(i, U, state, V, nbr_ptr, nbr_idx, apex, lo, cell, bnx, bny, bptr, bidx,
               buf, r_nf, F2, func, tol, mid):
    xi = V[i, 0]
    yi = V[i, 1]
    best = np.inf
    m = _gather(xi, yi, cell, V, lo, cell, bnx, bny, bptr, bidx, buf)
    for t in range(m):
        j = buf[t]
        if state[j] != ACCEPTED:
            continue
        dxj = V[j, 0] - xi
        dyj = V[j, 1] - yi
        dj = math.sqrt(dxj * dxj + dyj * dyj)
        if dj <= r_nf and _is_front_vertex(j, nbr_ptr, nbr_idx, state):
            if U[j] + dj / F2 < best:
                val = _phi(1.0, U[j], U[j], xi, yi, V[j, 0], V[j, 1], V[j, 0], V[j, 1], func, mid)
                if val < best:
                    best = val
        for e in range(nbr_ptr[j], nbr_ptr[j + 1]):
            k = nbr_idx[e]
            if k <= j or state[k] != ACCEPTED or not _is_live(e, apex, state):
                continue
            ds = _seg_dist(xi, yi, V[j, 0], V[j, 1], V[k, 0], V[k, 1])
            if ds > r_nf:
                continue
            if min(U[j], U[k]) + ds / F2 >= best:
                continue
            val = _update_K(U[j], U[k], xi, yi, V[j, 0], V[j, 1], V[k, 0], V[k, 1], func, tol, mid)
            if val < best:
                best = val
    return best


@njit
def _oum_kernel(V, nbr_ptr, nbr_idx, apex, lo, cell, bnx, bny, bptr, bidx,
                b_ids, b_vals, r_nf, F2, func, tol, mid):
    nv = V.shape[0]
    U = np.full(nv, np.inf)
    state = np.zeros(nv, dtype=np.int8)
    heap = np.empty(nv, dtype=np.int64)
    pos = np.full(nv, -1, dtype=np.int64)
    keys = np.full(nv, np.inf)
    order = np.empty(nv, dtype=np.int64)
    acc_keys = np.empty(nv)
    recomp = np.zeros(nv, dtype=np.int64)
    fresh = np.full(nv, -1, dtype=np.int64)
    buf = np.empty(nv, dtype=np.int64)
    violations = 0
    n_acc = 0
    n = 0
    # heap keys never drop below the level of the last acceptance
    level = -np.inf
    # steps 1-2: boundary straight to Accepted
    for s in range(len(b_ids)):
        v = b_ids[s]
        if state[v] != FAR:
            violations += 1
        state[v] = ACCEPTED
        U[v] = b_vals[s]
        order[n_acc] = v
        acc_keys[n_acc] = U[v]
        n_acc += 1
    seeded = n_acc
    # step 3: neighbours of the boundary become Considered
    for s in range(len(b_ids)):
        v = b_ids[s]
        for e in range(nbr_ptr[v], nbr_ptr[v + 1]):
            w = nbr_idx[e]
            if state[w] == FAR:
                state[w] = CONSIDERED
                U[w] = _full_scan(w, U, state, V, nbr_ptr, nbr_idx, apex, lo, cell, bnx, bny,
                                  bptr, bidx, buf, r_nf, F2, func, tol, mid)
                if U[w] < np.inf:
                    n = heap_push(heap, pos, keys, n, w, max(U[w], level))
    pops = 0
    while n > 0:
        # steps 4-5
        r, n = heap_pop(heap, pos, keys, n)
        pops += 1
        level = keys[r]
        if state[r] != CONSIDERED:
            violations += 1
        state[r] = ACCEPTED
        order[n_acc] = r
        acc_keys[n_acc] = keys[r]
        n_acc += 1
        xr = V[r, 0]
        yr = V[r, 1]
        # step 6: promote Far neighbours with a full NF scan
        for e in range(nbr_ptr[r], nbr_ptr[r + 1]):
            w = nbr_idx[e]
            if state[w] == FAR:
                state[w] = CONSIDERED
                fresh[w] = r
                U[w] = _full_scan(w, U, state, V, nbr_ptr, nbr_idx, apex, lo, cell, bnx, bny,
                                  bptr, bidx, buf, r_nf, F2, func, tol, mid)
                if U[w] < np.inf:
                    n = heap_push(heap, pos, keys, n, w, max(U[w], level))
        # step 7: nearby Considered vertices try the segments new to the front
        m = _gather(xr, yr, cell, V, lo, cell, bnx, bny, bptr, bidx, buf)
        for t in range(m):
            i = buf[t]
            if state[i] != CONSIDERED or fresh[i] == r:
                continue
            xi = V[i, 0]
            yi = V[i, 1]
            best = U[i]
            touched = False
            dr = math.sqrt((xr - xi) ** 2 + (yr - yi) ** 2)
            if dr <= r_nf and _is_front_vertex(r, nbr_ptr, nbr_idx, state):
                touched = True
                if U[r] + dr / F2 < best:
                    val = _phi(1.0, U[r], U[r], xi, yi, xr, yr, xr, yr, func, mid)
                    if val < best:
                        best = val
            for e in range(nbr_ptr[r], nbr_ptr[r + 1]):
                k = nbr_idx[e]
                if state[k] != ACCEPTED or not _is_live(e, apex, state):
                    continue
                ds = _seg_dist(xi, yi, xr, yr, V[k, 0], V[k, 1])
                if ds > r_nf:
                    continue
                touched = True
                if min(U[r], U[k]) + ds / F2 >= best:
                    continue
                val = _update_K(U[r], U[k], xi, yi, xr, yr, V[k, 0], V[k, 1], func, tol, mid)
                if val < best:
                    best = val
            if touched:
                recomp[i] += 1
            if best < U[i]:
                U[i] = best
                n = heap_push(heap, pos, keys, n, i, max(best, level))
        # step 8: loop while Considered is non-empty
    return U, order[:n_acc], acc_keys[:n_acc], pops, seeded, violations, recomp


def _bounds(problem, F1, F2):
    sp = problem.speed
    F1 = sp.F1 if F1 is None else float(F1)
    F2 = sp.F2 if F2 is None else float(F2)
    if not 0 < F1 <= F2:
        raise ValueError("need 0 < F1 <= F2")
    return F1, F2


def oum_solve(problem: OUMProblem, F1=None, F2=None, tol=1e-9, mid=0.5, estimate=False,
              return_stats=False):
    """Per-vertex value function ``U`` (``inf`` where unreachable).

    ``F1``/``F2`` override the profile bounds; ``estimate=True`` re-derives
    them by sampling the profile at every vertex.  ``tol`` and ``mid`` are
    passed to the local update (see :func:`oum_update_K`).

    The heap key of a Considered vertex is ``max(U, level)`` where ``level``
    is the key of the latest acceptance, so keys leave the heap in
    non-decreasing order.  With anisotropy a tentative value can fall
    slightly below the current level; such vertices are accepted next and
    counted in ``stats.inversions``.
    """
    mesh = problem.mesh
    if estimate:
        F1, F2 = estimate_bounds(problem.speed.func, mesh.vertices)
    F1, F2 = _bounds(problem, F1, F2)
    h = mesh.diameter
    r_nf = h * F2 / F1
    cell = r_nf + h
    lo, bnx, bny, bptr, bidx = _bucket_vertices(mesh.vertices, cell)
    ids = np.array(sorted(problem.boundary), dtype=np.int64)
    vals = np.array([problem.boundary[b] for b in ids], dtype=float)
    t0 = time.perf_counter()
    U, order, keys, pops, seeded, viol, recomp = _oum_kernel(
        mesh.vertices, mesh.nbr_ptr, mesh.nbr_idx, mesh.apex, lo, cell, bnx, bny, bptr, bidx,
        ids, vals, r_nf, F2, problem.speed.func, tol, mid)
    if not return_stats:
        return U
    stats = SolveStats(mesh.n_vertices, int(pops), int(seeded), order, keys, int(viol),
                       recomputes=int(recomp.sum()),
                       values=U[order],
                       unreachable=int(np.count_nonzero(~np.isfinite(U))),
                       wall_time=time.perf_counter() - t0,
                       extra={"recompute_per_vertex": recomp, "radius": r_nf,
                              "search_radius": cell, "F1": F1, "F2": F2})
    return U, stats


def neighborhood_counts(mesh: SimplicialMesh, radius: float) -> np.ndarray:
    """Number of other vertices within ``radius`` of each vertex."""
    from scipy.spatial import cKDTree
    tree = cKDTree(mesh.vertices)
    counts = tree.query_ball_point(mesh.vertices, radius, return_length=True)
    return np.asarray(counts, dtype=np.int64) - 1


# ---------------------------------------------------------------------------
# reference solver

def oum_solve_reference(problem: OUMProblem, F1=None, F2=None, tol=1e-9, mid=0.5, audit=False):
    """Step-by-step OUM with an explicit :class:`AcceptedFront`.

    Every Considered vertex within ``h F2/F1`` of the newly accepted vertex
    is recomputed over its whole NF set.  With ``audit=True`` the whole front
    is also scanned at each acceptance and the result records how often a
    segment outside NF would have produced a smaller value.

    Returns ``(U, info)``.  Intended for small meshes.
    """
    mesh = problem.mesh
    F1, F2 = _bounds(problem, F1, F2)
    func = problem.speed.func
    h = mesh.diameter
    r_nf = h * F2 / F1
    V = mesh.vertices
    nv = mesh.n_vertices
    U = np.full(nv, np.inf)
    state = np.zeros(nv, dtype=np.int8)
    front = AcceptedFront(V, r_nf)
    heap = IndexedMinHeap(nv)
    order = []
    audit_outside = 0
    audit_gap = 0.0
    level = -np.inf

    def best_over(i, segs, verts):
        xi = V[i]
        best = np.inf
        for j, k in segs:
            best = min(best, _update_K(U[j], U[k], xi[0], xi[1], V[j, 0], V[j, 1],
                                       V[k, 0], V[k, 1], func, tol, mid))
        for j in verts:
            best = min(best, _phi(1.0, U[j], U[j], xi[0], xi[1], V[j, 0], V[j, 1],
                                  V[j, 0], V[j, 1], func, mid))
        return best

    def nf_value(i):
        segs = nf_segments(front, i, h, F2 / F1)
        verts = [j for j in front_verts if math.dist(V[i], V[j]) <= r_nf]
        return best_over(i, segs, verts)

    # Accepted vertices that still border a non-Accepted one
    front_verts = set()

    def refresh_front_verts():
        stale = [v for v in front_verts
                 if not any(state[w] != ACCEPTED for w in mesh.neighbors(v))]
        front_verts.difference_update(stale)

    for b, q in sorted(problem.boundary.items()):
        state[b] = ACCEPTED
        U[b] = q
        order.append(b)
    for b in problem.boundary:
        front.refresh_vertex(mesh, state, b)
        if any(state[w] != ACCEPTED for w in mesh.neighbors(b)):
            front_verts.add(b)
    for b in sorted(problem.boundary):
        for w in mesh.neighbors(b):
            if state[w] == FAR:
                state[w] = CONSIDERED
                U[w] = nf_value(w)
                if np.isfinite(U[w]):
                    heap.push(w, max(U[w], level))
    while heap:
        r, level = heap.pop()
        if audit:
            segs = list(front.segments)
            verts = list(front_verts)
            full = best_over(r, segs, verts)
            if full < U[r] - 1e-12:
                audit_outside += 1
                audit_gap = max(audit_gap, U[r] - full)
        state[r] = ACCEPTED
        order.append(r)
        front.refresh_vertex(mesh, state, r)
        front_verts.add(r)
        refresh_front_verts()
        for w in mesh.neighbors(r):
            if state[w] == FAR:
                state[w] = CONSIDERED
                U[w] = nf_value(w)
                if np.isfinite(U[w]):
                    heap.push(w, max(U[w], level))
        for i in np.flatnonzero(state == CONSIDERED):
            if math.dist(V[i], V[r]) <= r_nf:
                val = nf_value(i)
                if val < U[i]:
                    U[i] = val
                    heap.push(i, max(val, level))
    info = {"order": np.array(order), "audit_outside": audit_outside,
            "audit_gap": audit_gap, "radius": r_nf}
    return U, info
