import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from patchygsl.errors import BoundsError, ConfigError, GeometryError
from patchygsl.grid_world import CellIndex, GridWorld, empty_world, load_world, parse_world

from conftest import CONFIGS, wall_world
from oracles import brute_neighborhood, spfa_path_len


def test_cell_of_examples():
    w = empty_world(2.0, 2.0, 0.1, (0.05, 0.05))
    assert w.cell_of((0.05, 0.05)) == CellIndex(0, 0)
    assert w.cell_of((1.0, 1.0)) == CellIndex(10, 10)
    assert w.cell_of((0.3, 0.7)) == CellIndex(3, 7)
    with pytest.raises(BoundsError):
        w.cell_of((-0.1, 0.0))
    with pytest.raises(BoundsError):
        w.cell_of((2.0, 0.5))


def test_invariants_rejected():
    with pytest.raises(GeometryError):
        GridWorld(1.05, 1.0, 0.1, np.zeros((10, 10), bool), (0.5, 0.5))
    occ = np.zeros((4, 4), bool)
    occ[1, 1] = True
    with pytest.raises(GeometryError):
        GridWorld(4, 4, 1, occ, (1.5, 1.5))  # source on a wall
    occ = np.zeros((4, 4), bool)
    occ[:, 2] = True
    with pytest.raises(GeometryError):
        GridWorld(4, 4, 1, occ, (0.5, 0.5))  # two components
    GridWorld(4, 4, 1, occ, (0.5, 0.5), require_connected=False)
    with pytest.raises(GeometryError):
        GridWorld(2, 2, 1, np.ones((2, 2), bool), (0.5, 0.5))


def test_shortest_path_examples():
    w = empty_world(6.0, 6.0, 0.2, (5.0, 5.0))
    d = w.shortest_path_len((0.0, 0.0), (3.0, 4.0))
    assert abs(d - 5.0) <= math.sqrt(2) * 0.2
    assert w.shortest_path_len((1.1, 1.1), (1.1, 1.1)) == 0.0
    walled = wall_world()
    with pytest.raises(GeometryError):
        walled.shortest_path_len((5.5, 0.5), (1.5, 1.5))


def test_shortest_path_matches_bfs_oracle(walled):
    for a, b in [((0.5, 0.5), (9.5, 0.5)), ((2.5, 9.5), (8.5, 3.5)), ((0.5, 0.5), (3.5, 7.5))]:
        ca, cb = walled.cell_of(a), walled.cell_of(b)
        want = spfa_path_len(walled.occupancy, walled.cell_size, tuple(ca), tuple(cb))
        assert walled.shortest_path_len(a, b) == pytest.approx(want, abs=1e-12)


def test_neighborhood_examples(open_world):
    c = open_world.cell_of((2.1, 1.5))
    assert open_world.neighborhood(c, 0.0) == {c}
    assert len(open_world.neighborhood(c, 0.2)) == 5
    assert len(open_world.neighborhood(c, 0.2 * math.sqrt(2) - 1e-6)) == 5


def test_neighborhood_next_to_wall_matches_scan(walled):
    c = walled.cell_of((4.5, 4.5))
    got = walled.neighborhood(c, 2.3)
    assert all(not walled.occupancy[r, cc] for cc, r in got)
    assert got == brute_neighborhood(walled.occupancy, 1.0, tuple(c), 2.3)


def test_world_text_roundtrip(walled):
    again = parse_world(walled.to_text())
    assert np.array_equal(again.occupancy, walled.occupancy)
    assert again.source_pos == walled.source_pos
    assert again.cell_size == walled.cell_size


def test_world_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_world("2 2 1\n..\n..\n")  # no source
    with pytest.raises(ConfigError):
        parse_world("2 2 1\nS.\n.x\n")
    with pytest.raises(ConfigError):
        parse_world("two 2 1\nS.\n..\n")
    with pytest.raises(ConfigError, match="missing.txt"):
        load_world(tmp_path / "missing.txt")


def test_bundled_worlds_load():
    for name in ["open_40x24", "rooms_40x24", "open_100x60", "rooms_100x100"]:
        w = load_world(CONFIGS / "worlds" / f"{name}.txt")
        assert w.is_free_pos(w.source_pos)


def test_first_row_of_file_is_top():
    w = parse_world("2 2 1\n#.\n.S\n", require_connected=True)
    assert w.occupancy[1, 0] and not w.occupancy[0, 0]
    assert w.source_pos == (1.5, 0.5)


def test_clip_segment_stops_before_wall(walled):
    end = walled.clip_segment((3.5, 2.5), (7.5, 2.5), margin=0.01)
    assert end[0] == pytest.approx(5.0 - 0.01)
    assert walled.is_free_pos(end)
    end = walled.clip_segment((3.5, 7.5), (7.5, 7.5), margin=0.01)
    assert end[0] == 7.5  # through the gap


def test_corner_squeeze_blocked():
    occ = np.zeros((4, 4), bool)
    occ[2, 1] = True
    occ[1, 2] = True
    w = GridWorld(4, 4, 1, occ, (0.5, 0.5), require_connected=False)
    assert w.first_obstruction((1.5, 1.5), (2.5, 2.5)) is not None


# -- properties ---------------------------------------------------------------
cells = st.tuples(st.integers(0, 9), st.integers(0, 9))


def _free(w, c):
    return not w.occupancy[c[1], c[0]]


@given(a=cells, b=cells, c=cells)
def test_path_symmetric_and_triangle(a, b, c):
    w = wall_world()
    if not (_free(w, a) and _free(w, b) and _free(w, c)):
        return
    pa, pb, pc = (w.cell_center(x) for x in (a, b, c))
    ab, ba = w.shortest_path_len(pa, pb), w.shortest_path_len(pb, pa)
    assert ab == pytest.approx(ba, abs=1e-9)
    diag = math.sqrt(2) * w.cell_size
    assert ab <= w.shortest_path_len(pa, pc) + w.shortest_path_len(pc, pb) + diag


@given(c=cells, r1=st.floats(0, 4), r2=st.floats(0, 4))
def test_neighborhood_monotone(c, r1, r2):
    w = wall_world()
    if not _free(w, c):
        return
    lo, hi = sorted((r1, r2))
    assert w.neighborhood(CellIndex(*c), lo) <= w.neighborhood(CellIndex(*c), hi)


@given(x=st.floats(0, 3.999), y=st.floats(0, 2.999))
def test_cell_of_contains_point(x, y):
    w = empty_world(4.0, 3.0, 0.2, (1.1, 1.5))
    c = w.cell_of((x, y))
    cx, cy = w.cell_center(c)
    assert abs(cx - x) <= 0.1 + 1e-9 and abs(cy - y) <= 0.1 + 1e-9
