"""Anisotropic front propagation with the Ordered Upwind Method.

The first example is a homogeneous medium that is twice as fast along x as
along y.  Straight rays are optimal there, so the exact travel time is known.
The second computes geodesic distance on the bumpy surface
z = 0.9 sin(2 pi x) sin(2 pi y), seen from above: motion is slow wherever a
step in the plane climbs steeply.
"""
import numpy as np

from hjkit import Grid2D, OUMProblem, elliptic, mesh_from_grid, oum_solve, sin_manifold
from hjkit.fieldio import write_field

e = elliptic(2.0, 1.0)
for n in (33, 65, 129):
    g = Grid2D(n, n, -1, 1, -1, 1)
    U, stats = oum_solve(OUMProblem.point_source(mesh_from_grid(g), e, 0.0, 0.0), return_stats=True)
    X, Y = g.meshgrid()
    r = np.hypot(X, Y).ravel()
    with np.errstate(invalid="ignore"):
        exact = r * np.sqrt((X.ravel() / r / 2) ** 2 + (Y.ravel() / r) ** 2)
    exact[r == 0] = 0
    print(f"ellipse {n:4d}^2: max error {np.max(np.abs(U - exact)):.4f}, "
          f"{stats.recomputes} recomputes, {stats.wall_time:.2f}s")

g = Grid2D(129, 129, -0.5, 0.5, -0.5, 0.5)
U, stats = oum_solve(OUMProblem.point_source(mesh_from_grid(g), sin_manifold(), 0.0, 0.0), return_stats=True)
U = U.reshape(g.shape)
print(f"\nsurface distance from the origin to (0.5, 0.5): {U[-1, -1]:.4f}; to (0.5, 0): {U[64, -1]:.4f}")
print("the corner is further than its planar distance because the path must cross or skirt the bumps")
write_field("sin_manifold_distance.fld", g, U)
print("contour data written to sin_manifold_distance.fld")
