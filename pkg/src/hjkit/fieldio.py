"""Plain-text field files.

A 2D file starts with ``nx ny xmin xmax ymin ymax`` followed by the node
values, one grid row (fixed ``j``) per line.  Phase-space files use the
header ``nx ny ntheta xmin xmax ymin ymax`` and store the ``ntheta`` angle
planes one after the other.  Values are written with 17 significant digits
so a read/write round trip is exact.
"""

import numpy as np

from .grid import Grid2D

FMT = "%.17g"


def _fmt(v) -> str:
    return FMT % v


def format_field(grid: Grid2D, values) -> str:
    v = np.asarray(values, dtype=float).reshape(grid.shape)
    head = " ".join([str(grid.nx), str(grid.ny)] + [_fmt(b) for b in (grid.xmin, grid.xmax, grid.ymin, grid.ymax)])
    rows = [" ".join(_fmt(x) for x in row) for row in v]
    return "\n".join([head] + rows) + "\n"


def format_phase_field(grid: Grid2D, ntheta: int, values) -> str:
    v = np.asarray(values, dtype=float).reshape(ntheta, grid.ny, grid.nx)
    head = " ".join([str(grid.nx), str(grid.ny), str(ntheta)]
                    + [_fmt(b) for b in (grid.xmin, grid.xmax, grid.ymin, grid.ymax)])
    rows = [" ".join(_fmt(x) for x in row) for plane in v for row in plane]
    return "\n".join([head] + rows) + "\n"


def write_field(path, grid: Grid2D, values):
    with open(path, "w") as fh:
        fh.write(format_field(grid, values))


def write_phase_field(path, grid: Grid2D, ntheta: int, values):
    with open(path, "w") as fh:
        fh.write(format_phase_field(grid, ntheta, values))


def _parse(text, phase):
    lines = text.split("\n", 1)
    head = lines[0].split()
    want = 7 if phase else 6
    if len(head) != want:
        raise ValueError(f"field header needs {want} entries, got {len(head)}")
    try:
        nx, ny = int(head[0]), int(head[1])
        nth = int(head[2]) if phase else 1
        xmin, xmax, ymin, ymax = (float(s) for s in head[-4:])
    except ValueError as e:
        raise ValueError(f"malformed field header: {lines[0]!r}") from e
    grid = Grid2D(nx, ny, xmin, xmax, ymin, ymax)
    body = lines[1] if len(lines) > 1 else ""
    try:
        vals = np.array(body.split(), dtype=float)
    except ValueError as e:
        raise ValueError("non-numeric value in field body") from e
    if vals.size != nx * ny * nth:
        raise ValueError(f"expected {nx * ny * nth} values, found {vals.size}")
    return grid, nth, vals


def parse_field(text: str):
    """``(grid, values)`` with values shaped ``(ny, nx)``."""
    grid, _, vals = _parse(text, False)
    return grid, vals.reshape(grid.shape)


def parse_phase_field(text: str):
    """``(grid, ntheta, values)`` with values shaped ``(ntheta, ny, nx)``."""
    grid, nth, vals = _parse(text, True)
    return grid, nth, vals.reshape(nth, grid.ny, grid.nx)


def read_field(path):
    with open(path) as fh:
        return parse_field(fh.read())


def read_phase_field(path):
    with open(path) as fh:
        return parse_phase_field(fh.read())
