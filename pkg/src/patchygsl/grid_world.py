"""Planar occupancy-grid environment.

Cells are addressed as ``CellIndex(col, row)``; ``occupancy[row, col]`` is
True for blocked cells. Row 0 spans ``0 <= y < cell_size``. In the ASCII
world format the first grid line is the *top* row (largest y), so files
read like a map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import BoundsError, ConfigError, GeometryError

# floor() tolerance so that 0.3 / 0.1 lands in cell 3, not 2
_EDGE_EPS = 1e-9

_STEPS8 = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


class CellIndex(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True, eq=False)
class GridWorld:
    width_m: float
    height_m: float
    cell_size: float
    occupancy: np.ndarray
    source_pos: tuple[float, float]
    require_connected: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.cell_size <= 0:
            raise GeometryError("cell_size must be positive")
        cols = self.width_m / self.cell_size
        rows = self.height_m / self.cell_size
        if not (_is_pos_int(cols) and _is_pos_int(rows)):
            raise GeometryError(
                f"world {self.width_m}x{self.height_m} m is not a whole number of "
                f"{self.cell_size} m cells"
            )
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ.shape != (round(rows), round(cols)):
            raise GeometryError(
                f"occupancy shape {occ.shape} != {(round(rows), round(cols))}"
            )
        occ = occ.copy()
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "source_pos", (float(self.source_pos[0]), float(self.source_pos[1])))
        if not self.free.any():
            raise GeometryError("world has no free cell")
        if not self.is_free_pos(self.source_pos):
            raise GeometryError(f"source {self.source_pos} is not in a free cell")
        if self.require_connected:
            _, n = ndimage.label(self.free)
            if n != 1:
                raise GeometryError(f"free space splits into {n} components")

    # -- basic geometry -------------------------------------------------
    @property
    def n_cols(self) -> int:
        return self.occupancy.shape[1]

    @property
    def n_rows(self) -> int:
        return self.occupancy.shape[0]

    @cached_property
    def free(self) -> np.ndarray:
        f = ~self.occupancy
        f.setflags(write=False)
        return f

    @cached_property
    def has_obstacles(self) -> bool:
        return bool(self.occupancy.any())

    @cached_property
    def n_free(self) -> int:
        return int(self.free.sum())

    @cached_property
    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of cell-center coordinates, each shaped like the grid."""
        xs = (np.arange(self.n_cols) + 0.5) * self.cell_size
        ys = (np.arange(self.n_rows) + 0.5) * self.cell_size
        X, Y = np.meshgrid(xs, ys)
        return X, Y

    def in_bounds(self, pos) -> bool:
        x, y = pos
        return 0.0 <= x < self.width_m and 0.0 <= y < self.height_m

    def cell_of(self, pos) -> CellIndex:
        if not self.in_bounds(pos):
            raise BoundsError(f"position {tuple(pos)} outside {self.width_m}x{self.height_m} m world")
        col = min(int(math.floor(pos[0] / self.cell_size + _EDGE_EPS)), self.n_cols - 1)
        row = min(int(math.floor(pos[1] / self.cell_size + _EDGE_EPS)), self.n_rows - 1)
        return CellIndex(col, row)

    def cell_center(self, cell: CellIndex) -> tuple[float, float]:
        return ((cell[0] + 0.5) * self.cell_size, (cell[1] + 0.5) * self.cell_size)

    def valid_cell(self, cell: CellIndex) -> bool:
        return 0 <= cell[0] < self.n_cols and 0 <= cell[1] < self.n_rows

    def is_free_cell(self, cell: CellIndex) -> bool:
        return self.valid_cell(cell) and not self.occupancy[cell[1], cell[0]]

    def is_free_pos(self, pos) -> bool:
        return self.in_bounds(pos) and self.is_free_cell(self.cell_of(pos))

    def require_free(self, pos) -> CellIndex:
        cell = self.cell_of(pos)
        if self.occupancy[cell.row, cell.col]:
            raise GeometryError(f"position {tuple(pos)} is inside a blocked cell")
        return cell

    # -- neighborhoods --------------------------------------------------
    def neighborhood_mask(self, center: CellIndex, radius_m: float) -> np.ndarray:
        """Boolean grid of free cells whose centers lie within ``radius_m`` of ``center``'s."""
        X, Y = self.centers
        cx, cy = self.cell_center(center)
        r2 = radius_m * radius_m + 1e-9 * self.cell_size ** 2
        return ((X - cx) ** 2 + (Y - cy) ** 2 <= r2) & self.free

    def neighborhood_box(self, center: CellIndex, radius_m: float):
        """Sliced variant of :meth:`neighborhood_mask` for hot loops.

        Returns ``(rows, cols, mask)`` where ``rows``/``cols`` are slices into
        the grid and ``mask`` marks the neighborhood inside that window.
        """
        k = int(math.floor(radius_m / self.cell_size + 1e-9))
        r0, r1 = max(center.row - k, 0), min(center.row + k + 1, self.n_rows)
        c0, c1 = max(center.col - k, 0), min(center.col + k + 1, self.n_cols)
        dr = np.arange(r0, r1)[:, None] - center.row
        dc = np.arange(c0, c1)[None, :] - center.col
        inside = (dr * dr + dc * dc) * self.cell_size ** 2 <= radius_m * radius_m + 1e-9 * self.cell_size ** 2
        rows, cols = slice(r0, r1), slice(c0, c1)
        return rows, cols, inside & self.free[rows, cols]

    def neighborhood(self, center: CellIndex, radius_m: float) -> set[CellIndex]:
        rows, cols, mask = self.neighborhood_box(center, radius_m)
        rr, cc = np.nonzero(mask)
        return {CellIndex(int(c + cols.start), int(r + rows.start)) for r, c in zip(rr, cc)}

    # -- shortest paths -------------------------------------------------
    @cached_property
    def _graph(self):
        rows, cols = self.n_rows, self.n_cols
        free = self.free
        idx = np.arange(rows * cols).reshape(rows, cols)
        src, dst, w = [], [], []
        for dc, dr in _STEPS8:
            # cells (r, c) whose neighbor (r+dr, c+dc) is in range
            rs = slice(max(0, -dr), rows - max(0, dr))
            cs = slice(max(0, -dc), cols - max(0, dc))
            rn = slice(rs.start + dr, rs.stop + dr)
            cn = slice(cs.start + dc, cs.stop + dc)
            ok = free[rs, cs] & free[rn, cn]
            if dr and dc:
                # no corner cutting: both orthogonal cells must be free
                ok &= free[rs, cn] & free[rn, cs]
            src.append(idx[rs, cs][ok])
            dst.append(idx[rn, cn][ok])
            w.append(np.full(int(ok.sum()), math.hypot(dr, dc) * self.cell_size))
        n = rows * cols
        return csr_matrix((np.concatenate(w), (np.concatenate(src), np.concatenate(dst))), shape=(n, n))

    @cached_property
    def _dist_cache(self) -> dict:
        return {}

    def distances_from(self, pos) -> np.ndarray:
        """Graph distances (m) from ``pos``'s cell to every cell; inf where unreachable."""
        cell = self.require_free(pos)
        key = cell.row * self.n_cols + cell.col
        d = self._dist_cache.get(key)
        if d is None:
            d = dijkstra(self._graph, directed=True, indices=key).reshape(self.n_rows, self.n_cols)
            d.setflags(write=False)
            if len(self._dist_cache) > 64:
                self._dist_cache.clear()
            self._dist_cache[key] = d
        return d

    def shortest_path_len(self, a, b) -> float:
        """Obstacle-avoiding 8-connected path length in meters between the cells of a and b."""
        cb = self.require_free(b)
        d = float(self.distances_from(a)[cb.row, cb.col])
        if not math.isfinite(d):
            raise GeometryError(f"no free path between {tuple(a)} and {tuple(b)}")
        return d

    # -- segment clipping -----------------------------------------------
    def first_obstruction(self, a, b) -> float | None:
        """Fraction t in (0, 1] at which segment a->b first enters blocked or outside space.

        Grid traversal in the style of Amanatides & Woo. Returns None when the
        whole segment stays in free space.
        """
        ax, ay = float(a[0]), float(a[1])
        dx, dy = float(b[0]) - ax, float(b[1]) - ay
        cs = self.cell_size
        col, row = self.cell_of((ax, ay))
        sx = 1 if dx > 0 else -1
        sy = 1 if dy > 0 else -1
        if dx != 0.0:
            nx = (col + (1 if dx > 0 else 0)) * cs
            tmax_x, tdelta_x = (nx - ax) / dx, cs / abs(dx)
        else:
            tmax_x, tdelta_x = math.inf, math.inf
        if dy != 0.0:
            ny = (row + (1 if dy > 0 else 0)) * cs
            tmax_y, tdelta_y = (ny - ay) / dy, cs / abs(dy)
        else:
            tmax_y, tdelta_y = math.inf, math.inf
        while True:
            t = min(tmax_x, tmax_y)
            if t > 1.0:
                return None
            if tmax_x == tmax_y:
                # exact corner crossing: refuse to squeeze between two blocked cells
                if not (self.is_free_cell((col + sx, row)) and self.is_free_cell((col, row + sy))):
                    return max(t, 0.0)
                col += sx
                row += sy
                tmax_x += tdelta_x
                tmax_y += tdelta_y
            elif tmax_x < tmax_y:
                col += sx
                tmax_x += tdelta_x
            else:
                row += sy
                tmax_y += tdelta_y
            if not self.is_free_cell((col, row)):
                return max(t, 0.0)

    def clip_segment(self, a, b, margin: float) -> np.ndarray:
        """End point of a->b, cut short ``margin`` meters before the first obstruction."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        t = self.first_obstruction(a, b)
        if t is None:
            return b
        length = float(np.hypot(*(b - a)))
        if length == 0.0:
            return a
        t_stop = max(0.0, t - margin / length)
        out = a + (b - a) * t_stop
        if not self.is_free_pos(out):
            return a
        return out

    # -- serialization --------------------------------------------------
    def to_text(self) -> str:
        src = self.cell_of(self.source_pos)
        lines = [f"{self.width_m:g} {self.height_m:g} {self.cell_size:g}"]
        for row in range(self.n_rows - 1, -1, -1):
            chars = []
            for col in range(self.n_cols):
                if (col, row) == src:
                    chars.append("S")
                else:
                    chars.append("#" if self.occupancy[row, col] else ".")
            lines.append("".join(chars))
        return "\n".join(lines) + "\n"


def _is_pos_int(v: float) -> bool:
    return v > 0 and abs(v - round(v)) < 1e-9 and round(v) >= 1


def parse_world(text: str, *, require_connected: bool = True) -> GridWorld:
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith(";")]
    if not lines:
        raise ConfigError("empty world file")
    try:
        width_m, height_m, cell_size = (float(v) for v in lines[0].split())
    except ValueError as exc:
        raise ConfigError(f"bad world header {lines[0]!r}: expected 'width_m height_m cell_size'") from exc
    grid = lines[1:]
    n_rows = len(grid)
    n_cols = len(grid[0]) if grid else 0
    if any(len(r) != n_cols for r in grid):
        raise ConfigError("world rows have unequal length")
    occ = np.zeros((n_rows, n_cols), dtype=bool)
    source = None
    for i, line in enumerate(grid):
        row = n_rows - 1 - i
        for col, ch in enumerate(line):
            if ch == "#":
                occ[row, col] = True
            elif ch == "S":
                if source is not None:
                    raise ConfigError("world has more than one 'S' source cell")
                source = ((col + 0.5) * cell_size, (row + 0.5) * cell_size)
            elif ch != ".":
                raise ConfigError(f"unknown world character {ch!r} at line {i + 2}")
    if source is None:
        raise ConfigError("world has no 'S' source cell")
    try:
        return GridWorld(width_m, height_m, cell_size, occ, source, require_connected=require_connected)
    except GeometryError as exc:
        raise ConfigError(str(exc)) from exc


def load_world(path) -> GridWorld:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read world file {path}: {exc}") from exc
    try:
        return parse_world(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def empty_world(width_m: float, height_m: float, cell_size: float, source_pos=None) -> GridWorld:
    rows = round(height_m / cell_size)
    cols = round(width_m / cell_size)
    if source_pos is None:
        source_pos = (width_m / 2, height_m / 2)
    return GridWorld(width_m, height_m, cell_size, np.zeros((rows, cols), dtype=bool), source_pos)
