"""One-pass label-setting solvers for static Hamilton-Jacobi equations.

Dijkstra on grid networks, Fast Marching for the Eikonal equation, the
Ordered Upwind Method for anisotropic speeds, and a phase-space escape solver
that recovers all arrivals of the 2D Eikonal equation.
"""

from .grid import Grid2D, NodeState, ScalarField2D, bilinear_sample
from .heap import IndexedMinHeap
from .stats import SolveStats
from .mesh import SimplicialMesh, mesh_from_grid
from .dijkstra import DijkstraProblem, dijkstra_solve
from .fmm import EikonalProblem, fmm_local_update, fmm_solve
from .speed import SpeedProfile, elliptic, geodesic_speed, isotropic, peanut, sin_manifold
from .oum import OUMProblem, nf_segments, oum_solve, oum_update_K
from .escape import (ArrivalRecord, EscapeSolution, PhaseGrid3D, SlownessModel, char_velocity,
                     escape_local_update, escape_solve, extract_arrivals, extract_arrivals_many,
                     isochron)
from .models import builtin_model

__all__ = [
    "ArrivalRecord", "DijkstraProblem", "EikonalProblem", "EscapeSolution", "Grid2D",
    "IndexedMinHeap", "NodeState", "OUMProblem", "PhaseGrid3D", "ScalarField2D",
    "SimplicialMesh", "SlownessModel", "SolveStats", "SpeedProfile", "bilinear_sample",
    "builtin_model", "char_velocity", "dijkstra_solve", "elliptic", "escape_local_update",
    "escape_solve", "extract_arrivals", "extract_arrivals_many", "fmm_local_update", "fmm_solve",
    "geodesic_speed", "isochron", "isotropic", "mesh_from_grid", "nf_segments", "oum_solve",
    "oum_update_K", "peanut", "sin_manifold",
]
