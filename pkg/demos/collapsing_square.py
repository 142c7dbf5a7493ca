"""Isochrons of the escape time in the homogeneous square.

The isochron u = T is the set of phase points (x, z, theta) whose straight
ray needs exactly time T to reach the wall.  An interior point is on it once
for every direction in which the boundary is T away: never when the nearest
wall is farther than T, twice when only one wall is within reach, and up to
eight times near a corner or once T exceeds the half width.
"""
import numpy as np

from hjkit import Grid2D, PhaseGrid3D, SlownessModel, escape_solve, isochron

g = Grid2D(41, 41)
sol = escape_solve(PhaseGrid3D(g, 64), SlownessModel.constant(g))
for T in (0.1, 0.3, 0.5, 0.7):
    pts = isochron(sol, T)
    # crossings on angle edges at interior grid nodes
    at_node = np.isclose(pts[:, 0] / g.hx % 1, 0) & np.isclose(pts[:, 1] / g.hy % 1, 0)
    ij = np.round(pts[at_node, :2] / g.hx).astype(int)
    inner = np.all((ij > 0) & (ij < 40), axis=1)
    nodes, hits = np.unique(ij[inner], axis=0, return_counts=True)
    print(f"T = {T}: {len(pts):5d} points; {len(nodes):4d} interior nodes on the isochron, "
          f"nodes with 1, 2, 3, ... crossings: {np.bincount(hits)[1:].tolist()}")
    np.savetxt(f"isochron_{T}.txt", pts, header="x z theta", fmt="%.6f")
