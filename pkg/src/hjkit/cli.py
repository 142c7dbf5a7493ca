"""``hjkit solve``: run one solver on a builtin or file model and write field files."""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fieldio
from .dijkstra import DijkstraProblem, dijkstra_solve
from .escape import PhaseGrid3D, SlownessModel, escape_solve, extract_arrivals, isochron
from .fmm import EikonalProblem, fmm_solve
from .grid import Grid2D, ScalarField2D
from .mesh import mesh_from_grid
from .models import MODEL_NAMES, builtin_model
from .oum import OUMProblem, oum_solve
from .speed import SpeedProfile

EXIT_PARSE = 2
EXIT_MODEL = 3
EXIT_SOLVER = 4

MAX_NODES = 4_000_000   # phase nodes for escape, grid nodes otherwise


class ModelError(Exception):
    pass


class SolverError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hjkit", description="One-pass solvers for static Hamilton-Jacobi equations.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run a solver and write the result")
    s.add_argument("--solver", required=True, choices=["dijkstra", "fmm", "oum", "escape"])
    m = s.add_mutually_exclusive_group(required=True)
    m.add_argument("--builtin", metavar="NAME", help=f"builtin model: {', '.join(MODEL_NAMES)}")
    m.add_argument("--model-file", metavar="PATH", help="field file holding an isotropic speed F > 0")
    s.add_argument("--grid", nargs=2, type=int, metavar=("NX", "NY"))
    s.add_argument("--domain", nargs=4, type=float, metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    s.add_argument("--source", nargs=2, type=float, action="append", metavar=("X", "Y"),
                   help="point source (repeatable); default is the domain centre")
    s.add_argument("--out", metavar="PATH", help="output file, or file prefix for escape")
    s.add_argument("--ntheta", type=int, default=64, help="angle samples for escape")
    s.add_argument("--arrivals", nargs=4, type=float, metavar=("SX", "SZ", "RX", "RZ"),
                   help="escape: list arrivals at receiver (RX, RZ) from boundary source (SX, SZ)")
    s.add_argument("--isochron", type=float, action="append", metavar="T",
                   help="escape: write the phase-space isochron u = T (repeatable)")
    s.add_argument("--F1", type=float, help="oum: lower speed bound override")
    s.add_argument("--F2", type=float, help="oum: upper speed bound override")
    s.add_argument("--tol", type=float, default=1e-9, help="oum: golden-section tolerance")
    s.add_argument("--max-unreachable", type=int, default=0,
                   help="fail when more nodes than this stay unreached")
    return p


def _load_model(args):
    """``(model, grid)`` where ``model`` is a BuiltinModel or a speed ScalarField2D."""
    if args.builtin is not None:
        try:
            model = builtin_model(args.builtin)
        except ValueError as e:
            raise ModelError(str(e)) from None
        dom = args.domain or model.domain
        nx, ny = args.grid or (101, 101)
        return model, _grid(nx, ny, dom)
    try:
        g, vals = fieldio.read_field(args.model_file)
    except (OSError, ValueError) as e:
        raise ModelError(f"cannot read model file: {e}") from None
    if args.grid and tuple(args.grid) != (g.nx, g.ny):
        raise ModelError("--grid does not match the model file")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise ModelError("model speed must be finite and positive")
    return ScalarField2D(g, vals), g


def _grid(nx, ny, dom):
    try:
        g = Grid2D(nx, ny, *dom)
    except ValueError as e:
        raise ModelError(str(e)) from None
    return g


def _speed_field(model, grid):
    if isinstance(model, ScalarField2D):
        return model
    if not model.isotropic:
        raise ModelError(f"model {model.name!r} is anisotropic; use --solver oum")
    return ScalarField2D.from_function(grid, model.speed)


def _sources(args, grid):
    pts = args.source or [((grid.xmin + grid.xmax) / 2, (grid.ymin + grid.ymax) / 2)]
    out = {}
    for x, y in pts:
        try:
            out[grid.nearest_node(x, y)] = 0.0
        except ValueError as e:
            raise ModelError(str(e)) from None
    return out


def _summary(solver, stats, extra=""):
    print(f"solver={solver} nodes={stats.n_nodes} pops={stats.pops} seeded={stats.seeded} "
          f"recomputes={stats.recomputes} unreachable={stats.unreachable} "
          f"time={stats.wall_time:.3f}s{extra}")


def _check(stats, limit):
    if stats.unreachable > limit:
        raise SolverError(f"{stats.unreachable} unreachable nodes (limit {limit})")


def _run_grid_solver(args, model, grid):
    src = _sources(args, grid)
    if args.solver == "dijkstra":
        F = _speed_field(model, grid)
        # entering a node costs its crossing time, so unit speed gives step length
        costs = ScalarField2D(grid, grid.hx / F.values)
        field, stats = dijkstra_solve(DijkstraProblem(costs, src), return_stats=True)
        U = field.values
    elif args.solver == "fmm":
        F = _speed_field(model, grid)
        field, stats = fmm_solve(EikonalProblem(F, src), return_stats=True)
        U = field.values
    else:
        if isinstance(model, ScalarField2D):
            profile = _profile_from_field(model)
        else:
            profile = model.profile
        try:
            prob = OUMProblem(mesh_from_grid(grid), profile, src)
            U, stats = oum_solve(prob, F1=args.F1, F2=args.F2, tol=args.tol, return_stats=True)
        except ValueError as e:
            raise ModelError(str(e)) from None
    _summary(args.solver, stats)
    if args.out:
        fieldio.write_field(args.out, grid, U)
    _check(stats, args.max_unreachable)


def _profile_from_field(F: ScalarField2D) -> SpeedProfile:
    from numba import njit
    g = F.grid
    vals = np.ascontiguousarray(F.values)
    nx, ny, x0, y0, hx, hy = g.nx, g.ny, g.xmin, g.ymin, g.hx, g.hy

    @njit
    def f(a1, a2, x, y):
        sx = min(max((x - x0) / hx, 0.0), nx - 1.0)
        sy = min(max((y - y0) / hy, 0.0), ny - 1.0)
        i = min(int(sx), nx - 2)
        j = min(int(sy), ny - 2)
        fx = sx - i
        fy = sy - j
        return ((1 - fx) * (1 - fy) * vals[j, i] + fx * (1 - fy) * vals[j, i + 1]
                + (1 - fx) * fy * vals[j + 1, i] + fx * fy * vals[j + 1, i + 1])

    return SpeedProfile(f, float(vals.min()), float(vals.max()), "file")


def _run_escape(args, model, grid):
    if args.ntheta < 8:
        raise ModelError("--ntheta must be at least 8")
    if grid.size * args.ntheta > MAX_NODES:
        raise ModelError(f"phase grid larger than {MAX_NODES} nodes")
    if isinstance(model, ScalarField2D):
        slow = SlownessModel(grid, 1.0 / model.values, name="file")
    else:
        if not model.isotropic:
            raise ModelError(f"model {model.name!r} has no slowness; escape needs an isotropic model")
        slow = SlownessModel.from_function(grid, model.slowness, model.slowness_grad, name=model.name)
    phase = PhaseGrid3D(grid, args.ntheta)
    sol = escape_solve(phase, slow)
    _summary("escape", sol.stats, f" ntheta={args.ntheta}")
    prefix = None
    if args.out:
        prefix = args.out[:-4] if args.out.endswith(".fld") else args.out
        for name, arr in sol.fields().items():
            fieldio.write_phase_field(f"{prefix}.{name}.fld", grid, args.ntheta, arr)
    if args.arrivals:
        sx, sz, rx, rz = args.arrivals
        try:
            arr = extract_arrivals(sol, (rx, rz), (sx, sz))
        except ValueError as e:
            raise ModelError(str(e)) from None
        lines = ["branch theta t"] + [f"{a.branch} {a.theta:.17g} {a.t:.17g}" for a in arr]
        text = "\n".join(lines) + "\n"
        sys.stdout.write(text)
        if prefix:
            Path(f"{prefix}.arrivals.txt").write_text(text)
    for T in args.isochron or []:
        try:
            pts = isochron(sol, T)
        except ValueError as e:
            raise ModelError(str(e)) from None
        print(f"isochron T={T:g}: {len(pts)} points")
        if prefix:
            body = "".join(f"{x:.17g} {z:.17g} {t:.17g}\n" for x, z, t in pts)
            Path(f"{prefix}.isochron-{T:g}.txt").write_text("x z theta\n" + body)
    _check(sol.stats, args.max_unreachable)


def run(args) -> int:
    try:
        model, grid = _load_model(args)
        if args.solver != "escape" and grid.size > MAX_NODES:
            raise ModelError(f"grid larger than {MAX_NODES} nodes")
        if args.solver == "escape":
            _run_escape(args, model, grid)
        else:
            _run_grid_solver(args, model, grid)
    except ModelError as e:
        print(f"hjkit: invalid model: {e}", file=sys.stderr)
        return EXIT_MODEL
    except SolverError as e:
        print(f"hjkit: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as e:
        print(f"hjkit: {e}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
