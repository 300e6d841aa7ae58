"""Shared source-probability map and its potential.

The map holds p(x) over free cells. Each measurement is folded in with a
local, rule-based likelihood over a disc around the robot, then spread to
the rest of the map by a geometry-respecting relaxation. The potential
phi = -log p is what the Langevin planner descends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError
from .grid_world import CellIndex, GridWorld
from .sensors import Measurement


@dataclass
class EstimatorParams:
    w_hit: float = 1.5
    w_miss: float = 0.7
    cone_half_angle_deg: float = 40.0
    r_u: float = 1.5
    lam: float = 0.3
    n_prop: int = 2
    floor_scale: float = 1e-8  # p_floor = floor_scale / N_free
    threshold: float = 0.1


@dataclass(eq=False)
class BeliefMap:
    p: np.ndarray  # grid-shaped, 0 on blocked cells
    last_hit: tuple[tuple[float, float], float] | None = None
    p_floor: float = 0.0
    wind: tuple[float, float] | None = None  # heading of the latest fused reading

    def copy(self) -> "BeliefMap":
        return BeliefMap(self.p.copy(), self.last_hit, self.p_floor, self.wind)

    def total(self) -> float:
        return float(self.p.sum())

    def argmax_cell(self) -> CellIndex:
        r, c = np.unravel_index(int(np.argmax(self.p)), self.p.shape)
        return CellIndex(int(c), int(r))


@dataclass(eq=False)
class PotentialField:
    phi: np.ndarray  # grid-shaped, nan on blocked cells
    world: GridWorld = field(repr=False)


def init_belief(world: GridWorld, params: EstimatorParams | None = None) -> BeliefMap:
    params = params or EstimatorParams()
    p = np.where(world.free, 1.0 / world.n_free, 0.0)
    return BeliefMap(p, None, params.floor_scale / world.n_free)


def normalize(p: np.ndarray, free: np.ndarray, p_floor: float) -> np.ndarray:
    """Rescale to unit mass over free cells with every free cell >= p_floor.

    ``p`` must already be zero on blocked cells; it is modified in place.
    """
    p /= p.sum()
    if p_floor <= 0 or np.min(p, where=free, initial=np.inf) >= p_floor:
        return p
    low = free & (p < p_floor)
    while True:
        fixed = low.sum() * p_floor
        rest = free & ~low
        p[low] = p_floor
        p[rest] *= (1.0 - fixed) / p[rest].sum()
        new_low = rest & (p < p_floor)
        if not new_low.any():
            return p
        low |= new_low


def likelihood_weights_batch(world: GridWorld, positions, detected: bool, wind, last_hit_pos,
                             params: EstimatorParams):
    """Weights of one hypothetical reading taken at each of K positions.

    Returns ``(rows, cols, W, disc)``: a common grid window and (K, h, w)
    arrays of weights (1 outside each position's neighborhood) and
    neighborhood masks. Distances and cone angles are both measured from
    the center of the sensing cell; that apex cell has no direction, so it
    sits in no cone.
    """
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    cs = world.cell_size
    cells = [world.cell_of(p) for p in pos]
    k = int(math.floor(params.r_u / cs + 1e-9))
    r0 = max(min(c.row for c in cells) - k, 0)
    r1 = min(max(c.row for c in cells) + k + 1, world.n_rows)
    c0 = max(min(c.col for c in cells) - k, 0)
    c1 = min(max(c.col for c in cells) + k + 1, world.n_cols)
    rows, cols = slice(r0, r1), slice(c0, c1)
    rr = np.arange(r0, r1)[None, :, None]
    cc = np.arange(c0, c1)[None, None, :]
    crow = np.array([c.row for c in cells])[:, None, None]
    ccol = np.array([c.col for c in cells])[:, None, None]
    d2 = ((rr - crow) ** 2 + (cc - ccol) ** 2) * cs * cs
    disc = (d2 <= params.r_u ** 2 + 1e-9 * cs * cs) & world.free[rows, cols][None]

    # vectors from each apex cell center to the window's cell centers
    vx = (cc - ccol) * cs
    vy = (rr - crow) * cs
    norm = np.hypot(vx, vy)
    W = np.ones(disc.shape)
    cos_lim = math.cos(math.radians(params.cone_half_angle_deg))

    def cones(ax, ay):
        n = np.hypot(ax, ay)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = (vx * (ax / n) + vy * (ay / n)) / norm
        ok = norm > 1e-12
        return ok & (cosang >= cos_lim), ok & (cosang <= -cos_lim)

    if detected:
        wx, wy = float(wind[0]), float(wind[1])
        if math.hypot(wx, wy) > 1e-12:
            up, down = cones(-wx, -wy)
            W[disc & up] = params.w_hit
            W[disc & down] = params.w_miss
        else:
            # no usable heading: raise the whole neighborhood
            W[disc] = params.w_hit
        return rows, cols, W, disc
    if last_hit_pos is not None:
        ax = last_hit_pos[0] - (ccol + 0.5) * cs
        ay = last_hit_pos[1] - (crow + 0.5) * cs
        # a last hit inside the apex cell gives no usable direction
        lh = world.cell_of(last_hit_pos)
        has_axis = (crow != lh.row) | (ccol != lh.col)
        with np.errstate(invalid="ignore", divide="ignore"):
            toward, away = cones(np.where(has_axis, ax, 1.0), np.where(has_axis, ay, 0.0))
        W[disc & toward & has_axis] = params.w_hit
        W[disc & away & has_axis] = params.w_miss
        W[disc & ~has_axis] = params.w_miss
        return rows, cols, W, disc
    W[disc] = params.w_miss
    return rows, cols, W, disc


def likelihood_weights(world: GridWorld, pos, detected: bool, wind, last_hit_pos,
                       params: EstimatorParams):
    """Single-position form of :func:`likelihood_weights_batch`: ``(rows, cols, w, disc)``."""
    rows, cols, W, disc = likelihood_weights_batch(world, [pos], detected, wind, last_hit_pos, params)
    return rows, cols, W[0], disc[0]


def local_update(belief: BeliefMap, m: Measurement, world: GridWorld,
                 params: EstimatorParams | None = None) -> BeliefMap:
    params = params or EstimatorParams()
    if not world.is_free_pos(m.pos):
        raise GeometryError(f"measurement position {m.pos} is not free")
    detected = m.conc >= params.threshold
    last = belief.last_hit[0] if belief.last_hit is not None else None
    rows, cols, w, _ = likelihood_weights(world, m.pos, detected, m.wind, last, params)
    p = belief.p.copy()
    p[rows, cols] *= w
    p = normalize(p, world.free, belief.p_floor)
    last_hit = ((m.pos[0], m.pos[1]), m.time) if detected else belief.last_hit
    wind = tuple(m.wind) if math.hypot(*m.wind) > 1e-12 else belief.wind
    return BeliefMap(p, last_hit, belief.p_floor, wind)


def update_region_mask(world: GridWorld, pos, params: EstimatorParams | None = None) -> np.ndarray:
    params = params or EstimatorParams()
    rows, cols, disc = world.neighborhood_box(world.cell_of(pos), params.r_u)
    mask = np.zeros(world.occupancy.shape, dtype=bool)
    mask[rows, cols] = disc
    return mask


def _as_mask(world: GridWorld, region) -> np.ndarray:
    if isinstance(region, np.ndarray) and region.dtype == bool:
        return region
    mask = np.zeros(world.occupancy.shape, dtype=bool)
    for col, row in region:
        mask[row, col] = True
    return mask


_STENCILS: dict = {}


def _stencil(free: np.ndarray, lam: float):
    """Per-cell (self, neighbor-sum) coefficients of one relaxation sweep."""
    key = (id(free), lam)
    hit = _STENCILS.get(key)
    if hit is not None and hit[0] is free:
        return hit[1]
    # neighbors missing from the 4-stencil (walls or grid edge) count as self
    n_nb = np.zeros(free.shape)
    n_nb[1:, :] += free[:-1, :]
    n_nb[:-1, :] += free[1:, :]
    n_nb[:, 1:] += free[:, :-1]
    n_nb[:, :-1] += free[:, 1:]
    ff = free.astype(float)
    coefs = (ff * ((1.0 - lam) + 0.25 * lam * (4.0 - n_nb)), ff * (0.25 * lam))
    if len(_STENCILS) > 8:
        _STENCILS.clear()
    _STENCILS[key] = (free, coefs)
    return coefs


def relax(p: np.ndarray, free: np.ndarray, fixed: np.ndarray, lam: float, sweeps: int) -> np.ndarray:
    """Jacobi sweeps of p <- (1-lam) p + lam * mean(4-neighbors) on free, non-fixed cells.

    A blocked or off-grid neighbor contributes the cell's own value, so no
    probability flows through walls and mass is conserved across them.
    ``p`` must be zero on blocked cells.
    """
    a, b = _stencil(free, lam)
    held = p.copy()
    s = np.empty_like(p)
    for _ in range(sweeps):
        s.fill(0.0)
        s[1:, :] += p[:-1, :]
        s[:-1, :] += p[1:, :]
        s[:, 1:] += p[:, :-1]
        s[:, :-1] += p[:, 1:]
        s *= b
        p = a * p
        p += s
        np.copyto(p, held, where=fixed)
    return p


def propagate_global(belief: BeliefMap, updated_region, world: GridWorld,
                     params: EstimatorParams | None = None) -> BeliefMap:
    params = params or EstimatorParams()
    fixed = _as_mask(world, updated_region)
    if params.lam == 0 or params.n_prop == 0:
        return belief.copy()
    p = relax(belief.p, world.free, fixed, params.lam, params.n_prop)
    p = normalize(p, world.free, belief.p_floor)
    return BeliefMap(p, belief.last_hit, belief.p_floor, belief.wind)


def apply_measurement(belief: BeliefMap, m: Measurement, world: GridWorld,
                      params: EstimatorParams | None = None) -> BeliefMap:
    """local_update followed by propagate_global over the same neighborhood."""
    params = params or EstimatorParams()
    b = local_update(belief, m, world, params)
    return propagate_global(b, update_region_mask(world, m.pos, params), world, params)


def potential_of(belief: BeliefMap, world: GridWorld) -> PotentialField:
    with np.errstate(divide="ignore"):
        phi = -np.log(belief.p + world.occupancy)
    np.copyto(phi, np.nan, where=world.occupancy)
    return PotentialField(phi, world)


def entropy(p: np.ndarray) -> float:
    q = p[p > 0]
    return float(-(q * np.log(q)).sum())


# -- continuous-position access ------------------------------------------
def phi_at(field: PotentialField, pos) -> float:
    """Bilinear interpolation of cell-centered phi; blocked corners are dropped."""
    world = field.world
    cs = world.cell_size
    u = pos[0] / cs - 0.5
    v = pos[1] / cs - 0.5
    c0 = math.floor(u)
    r0 = math.floor(v)
    fu, fv = u - c0, v - r0
    total = 0.0
    wsum = 0.0
    phi = field.phi
    for dc, dr, wt in ((0, 0, (1 - fu) * (1 - fv)), (1, 0, fu * (1 - fv)),
                       (0, 1, (1 - fu) * fv), (1, 1, fu * fv)):
        c = min(max(c0 + dc, 0), world.n_cols - 1)
        r = min(max(r0 + dr, 0), world.n_rows - 1)
        val = phi[r, c]
        if wt > 0.0 and val == val:  # skip nan (blocked)
            total += wt * val
            wsum += wt
    if wsum == 0.0:
        cell = world.cell_of(pos)
        return float(phi[cell.row, cell.col])
    return total / wsum


def grad_phi(field: PotentialField, pos, h: float, world: GridWorld | None = None) -> np.ndarray:
    """Central-difference gradient of interpolated phi with one-sided fallback near walls."""
    world = world or field.world
    x, y = float(pos[0]), float(pos[1])
    here = None
    g = [0.0, 0.0]
    for axis in (0, 1):
        plus = (x + h, y) if axis == 0 else (x, y + h)
        minus = (x - h, y) if axis == 0 else (x, y - h)
        ok_p = world.is_free_pos(plus)
        ok_m = world.is_free_pos(minus)
        if ok_p and ok_m:
            g[axis] = (phi_at(field, plus) - phi_at(field, minus)) / (2.0 * h)
        elif ok_p or ok_m:
            if here is None:
                here = phi_at(field, (x, y))
            if ok_p:
                g[axis] = (phi_at(field, plus) - here) / h
            else:
                g[axis] = (here - phi_at(field, minus)) / h
    return np.array(g)
