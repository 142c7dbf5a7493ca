"""Triangulated planar meshes built on top of :class:`~hjkit.grid.Grid2D`."""

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid2D


@dataclass
class SimplicialMesh:
    """Planar triangle mesh with vertex adjacency in CSR form.

    ``nbr_idx[nbr_ptr[v]:nbr_ptr[v+1]]`` lists the vertices sharing an edge
    with ``v``; ``apex`` has one row per such directed edge holding the third
    vertex of the (at most two) incident triangles, ``-1`` where absent.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    grid: Grid2D = None
    nbr_ptr: np.ndarray = field(init=False, repr=False)
    nbr_idx: np.ndarray = field(init=False, repr=False)
    apex: np.ndarray = field(init=False, repr=False)
    tri_ptr: np.ndarray = field(init=False, repr=False)
    tri_idx: np.ndarray = field(init=False, repr=False)
    boundary: np.ndarray = field(init=False, repr=False)
    diameter: float = field(init=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        v, t = self.vertices, self.triangles
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        area2 = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
        if np.any(np.abs(area2) <= 0.0):
            raise ValueError("mesh contains degenerate triangles")
        self._build_topology()

    def _build_topology(self):
        nv = len(self.vertices)
        # edge -> list of apex vertices
        edge_apex = {}
        for a, b, c in self.triangles.tolist():
            for (p, q, r) in ((a, b, c), (b, c, a), (c, a, b)):
                key = (p, q) if p < q else (q, p)
                edge_apex.setdefault(key, []).append(r)
        nbrs = [[] for _ in range(nv)]
        for (p, q), apexes in edge_apex.items():
            if len(apexes) > 2:
                raise ValueError(f"edge {(p, q)} is shared by more than two triangles")
            ap = tuple(apexes) + (-1,) * (2 - len(apexes))
            nbrs[p].append((q, ap))
            nbrs[q].append((p, ap))
        ptr = np.zeros(nv + 1, dtype=np.int64)
        for v_ in range(nv):
            nbrs[v_].sort()
            ptr[v_ + 1] = ptr[v_] + len(nbrs[v_])
        self.nbr_ptr = ptr
        self.nbr_idx = np.array([q for lst in nbrs for q, _ in lst], dtype=np.int64)
        self.apex = np.array([ap for lst in nbrs for _, ap in lst], dtype=np.int64).reshape(-1, 2)

        vt = [[] for _ in range(nv)]
        for ti, tri in enumerate(self.triangles.tolist()):
            for a in tri:
                vt[a].append(ti)
        tptr = np.zeros(nv + 1, dtype=np.int64)
        for v_ in range(nv):
            tptr[v_ + 1] = tptr[v_] + len(vt[v_])
        self.tri_ptr = tptr
        self.tri_idx = np.array([ti for lst in vt for ti in lst], dtype=np.int64)

        boundary = np.zeros(nv, dtype=bool)
        for (p, q), apexes in edge_apex.items():
            if len(apexes) == 1:
                boundary[p] = boundary[q] = True
        self.boundary = boundary

        e = self.edges
        d = self.vertices[e[:, 0]] - self.vertices[e[:, 1]]
        self.diameter = float(np.max(np.hypot(d[:, 0], d[:, 1]))) if len(e) else 0.0

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n_vertices), np.diff(self.nbr_ptr))
        keep = src < self.nbr_idx
        return np.column_stack([src[keep], self.nbr_idx[keep]])

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr_idx[self.nbr_ptr[v]:self.nbr_ptr[v + 1]]

    def vertex_triangles(self, v: int) -> np.ndarray:
        return self.tri_idx[self.tri_ptr[v]:self.tri_ptr[v + 1]]

    def nearest_vertex(self, x: float, y: float) -> int:
        d = np.hypot(self.vertices[:, 0] - x, self.vertices[:, 1] - y)
        return int(np.argmin(d))


def mesh_from_grid(grid: Grid2D) -> SimplicialMesh:
    """Split every grid cell into two triangles along its lower-left to
    upper-right diagonal.  Vertex ids coincide with grid node ids."""
    X, Y = grid.meshgrid()
    verts = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(grid.nx - 1), np.arange(grid.ny - 1), indexing="xy")
    v00 = (i + grid.nx * j).ravel()
    v10 = v00 + 1
    v01 = v00 + grid.nx
    v11 = v01 + 1
    tris = np.concatenate([np.column_stack([v00, v10, v11]),
                           np.column_stack([v00, v11, v01])])
    return SimplicialMesh(verts, tris, grid=grid)
