import numpy as np
import pytest

from hjkit.fieldio import (format_field, format_phase_field, parse_field, parse_phase_field, read_field,
                           write_field, write_phase_field)
from hjkit.grid import Grid2D


def test_round_trip_exact(tmp_path, rng):
    g = Grid2D(7, 4, -1.5, 2.0, 0.1, 0.9)
    v = rng.normal(size=g.shape) * 10.0 ** rng.integers(-20, 20, g.shape)
    v[1, 2] = np.inf
    p = tmp_path / "a.fld"
    write_field(p, g, v)
    g2, v2 = read_field(p)
    assert g2 == g and np.array_equal(v2, v)
    assert format_field(g2, v2) == p.read_text()


def test_row_major_layout():
    text = format_field(Grid2D(3, 2), [[0, 1, 2], [3, 4, 5]])
    lines = text.splitlines()
    assert lines[0] == "3 2 0 1 0 1"
    assert lines[1].split() == ["0", "1", "2"] and lines[2].split() == ["3", "4", "5"]


def test_phase_round_trip(tmp_path, rng):
    g = Grid2D(4, 3)
    v = rng.random((8, 3, 4))
    p = tmp_path / "p.fld"
    write_phase_field(p, g, 8, v)
    assert p.read_text().splitlines()[0] == "4 3 8 0 1 0 1"
    g2, n, v2 = parse_phase_field(p.read_text())
    assert n == 8 and np.array_equal(v2, v)
    assert format_phase_field(g2, n, v2) == p.read_text()


@pytest.mark.parametrize("text", ["3 2 0 1 0\n1 2 3 4 5 6\n", "3 2 0 1 0 1\n1 2 3\n",
                                  "3 2 0 1 0 1\n1 2 x 4 5 6\n", "a b 0 1 0 1\n"])
def test_malformed(text):
    with pytest.raises(ValueError):
        parse_field(text)
