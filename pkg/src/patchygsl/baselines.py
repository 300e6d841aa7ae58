"""Comparison planners: reactive Surge-Cast and map-based Infotaxis.

Surge-Cast looks only at the current measurement. Infotaxis looks only at
the shared belief map (including the wind heading the map last fused).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .estimator import BeliefMap, EstimatorParams, likelihood_weights_batch
from .grid_world import GridWorld
from .langevin import PlannerParams, RobotState, move_with_walls
from .sensors import Measurement


@dataclass
class SurgeCastParams:
    conc_threshold: float = 0.1
    cast_leg_len: float = 2.0
    growth: float = 1.5


@dataclass
class SurgeCastState:
    mode: str = "cast"
    cast_sign: int = 1
    cast_leg_len: float = 2.0
    conc_threshold: float = 0.1
    leg_traveled: float = 0.0
    initial_leg_len: float = 2.0
    growth: float = 1.5
    last_wind: tuple[float, float] | None = None

    @classmethod
    def from_params(cls, p: SurgeCastParams) -> "SurgeCastState":
        return cls(cast_leg_len=p.cast_leg_len, conc_threshold=p.conc_threshold,
                   initial_leg_len=p.cast_leg_len, growth=p.growth)


def _unit(v) -> np.ndarray | None:
    n = math.hypot(v[0], v[1])
    if n <= 1e-12:
        return None
    return np.array([v[0] / n, v[1] / n])


def surge_cast_step(robot: RobotState, m: Measurement, state: SurgeCastState,
                    params: PlannerParams, world: GridWorld, time: float | None = None):
    """Surge upwind on detection, otherwise cast crosswind with growing legs."""
    wind_dir = _unit(m.wind)
    if wind_dir is None and state.last_wind is not None:
        wind_dir = _unit(state.last_wind)
    if wind_dir is not None:
        state = replace(state, last_wind=(float(wind_dir[0]), float(wind_dir[1])))
    step = params.v_max * params.dt
    if wind_dir is None:
        # no heading ever seen: head +x in either mode
        mode = "surge" if m.conc >= state.conc_threshold else "cast"
        state = replace(state, mode=mode)
        disp = np.array([step, 0.0])
    elif m.conc >= state.conc_threshold:
        state = replace(state, mode="surge", leg_traveled=0.0, cast_leg_len=state.initial_leg_len)
        disp = -wind_dir * step
    else:
        if state.leg_traveled >= state.cast_leg_len - 1e-12:
            state = replace(state, cast_sign=-state.cast_sign, leg_traveled=0.0,
                            cast_leg_len=state.cast_leg_len * state.growth)
        perp = np.array([-wind_dir[1], wind_dir[0]])
        disp = perp * state.cast_sign * step
        state = replace(state, mode="cast")
    t = robot.trajectory[-1][0] + params.dt if time is None else time
    moved = move_with_walls(robot, disp, world, params.wall_margin_frac * world.cell_size, t)
    traveled = math.dist(moved.pos, robot.pos)
    if state.mode == "cast" and wind_dir is not None:
        if traveled < 1e-9:
            # blocked crosswind: treat the leg as finished
            state = replace(state, leg_traveled=state.cast_leg_len)
        else:
            state = replace(state, leg_traveled=state.leg_traveled + traveled)
    return moved, state


# -- Infotaxis -------------------------------------------------------------
@dataclass
class InfotaxisParams:
    candidate_step: float | None = None  # None -> v_max * dt
    kernel_len: float = 2.0
    tie_tol: float = 1e-9


# index 0 is "stay", then counter-clockwise from east
COMPASS = (
    (0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (-1.0, 1.0),
    (-1.0, 0.0), (-1.0, -1.0), (0.0, -1.0), (1.0, -1.0),
)


def candidate_moves(robot: RobotState, world: GridWorld, step: float) -> list[tuple[int, np.ndarray]]:
    out = []
    here = np.asarray(robot.pos)
    for k, (dx, dy) in enumerate(COMPASS):
        d = np.array([dx, dy])
        n = math.hypot(dx, dy)
        c = here + (d / n * step if n else d)
        if n and (not world.is_free_pos(c) or world.first_obstruction(here, c) is not None):
            continue
        out.append((k, c))
    return out


def _posterior_entropies(p: np.ndarray, plogp_sum: float, rows, cols, W: np.ndarray) -> np.ndarray:
    """Entropy of p*W/Z for each of the K weight windows in ``W`` (K, h, w)."""
    win = p[rows, cols][None]
    pw = win * W
    z = 1.0 + (win * (W - 1.0)).sum(axis=(1, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(pw > 0, pw * np.log(pw), 0.0)
        b = np.where(win > 0, win * np.log(win), 0.0)
    s = (plogp_sum + (a - b).sum(axis=(1, 2))) / z - np.log(z)
    return -s


_KERNELS: dict = {}


def detection_kernel(world: GridWorld, kernel_len: float) -> np.ndarray:
    """exp(-d / kernel_len) on every cell offset; index [R-1+dr, C-1+dc]."""
    key = (world.n_rows, world.n_cols, world.cell_size, kernel_len)
    k = _KERNELS.get(key)
    if k is None:
        dr = np.arange(-(world.n_rows - 1), world.n_rows)[:, None]
        dc = np.arange(-(world.n_cols - 1), world.n_cols)[None, :]
        k = np.exp(-np.hypot(dr, dc) * world.cell_size / kernel_len)
        _KERNELS.clear()
        _KERNELS[key] = k
    return k


def detection_probability(p: np.ndarray, world: GridWorld, cell, kernel_len: float) -> float:
    """Sum over cells x of p(x) * exp(-|center(cell) - center(x)| / kernel_len)."""
    k = detection_kernel(world, kernel_len)
    R, C = world.n_rows, world.n_cols
    col, row = cell
    sub = k[R - 1 - row:2 * R - 1 - row, C - 1 - col:2 * C - 1 - col]
    return float(min(1.0, np.vdot(p, sub)))


def _plogp(belief: BeliefMap) -> float:
    cached = getattr(belief, "_plogp", None)
    if cached is None:
        p = belief.p
        with np.errstate(divide="ignore", invalid="ignore"):
            cached = float(np.where(p > 0, p * np.log(p), 0.0).sum())
        belief._plogp = cached
    return cached


def expected_entropies(belief: BeliefMap, world: GridWorld, candidates, wind,
                       est: EstimatorParams, kernel_len: float):
    """(P_det, H_hit, H_miss, expected H) for each candidate position."""
    p = belief.p
    plogp = _plogp(belief)
    positions = [c for _, c in candidates]
    last = belief.last_hit[0] if belief.last_hit is not None else None
    r, cl, W_hit, _ = likelihood_weights_batch(world, positions, True, wind, last, est)
    h_hit = _posterior_entropies(p, plogp, r, cl, W_hit)
    r, cl, W_miss, _ = likelihood_weights_batch(world, positions, False, wind, last, est)
    h_miss = _posterior_entropies(p, plogp, r, cl, W_miss)
    out = []
    for k, c in enumerate(positions):
        p_det = detection_probability(p, world, world.cell_of(c), kernel_len)
        out.append((p_det, float(h_hit[k]), float(h_miss[k]),
                    p_det * float(h_hit[k]) + (1.0 - p_det) * float(h_miss[k])))
    return out


def infotaxis_step(robot: RobotState, belief: BeliefMap, world: GridWorld,
                   params: PlannerParams, rng: np.random.Generator | None = None,
                   info: InfotaxisParams | None = None, est: EstimatorParams | None = None,
                   wind=None, time: float | None = None) -> RobotState:
    """Greedy one-step Infotaxis over stay + 8 compass moves.

    ``wind`` defaults to the heading stored in the belief; it only shapes the
    hypothetical detection posterior. Ties (within ``tie_tol``) go to the
    candidate closest to the belief peak, then to the lowest compass index.
    """
    info = info or InfotaxisParams()
    est = est or EstimatorParams()
    step = info.candidate_step if info.candidate_step is not None else params.v_max * params.dt
    if wind is None:
        wind = getattr(belief, "wind", None) or (0.0, 0.0)
    cands = candidate_moves(robot, world, step)
    t = robot.trajectory[-1][0] + params.dt if time is None else time
    if not cands:
        return robot.moved_to(robot.pos, t)
    scores = expected_entropies(belief, world, cands, wind, est, info.kernel_len)
    best = min(s[3] for s in scores)
    peak = world.cell_center(belief.argmax_cell())
    tied = [(math.dist(c, peak), k, c) for (k, c), s in zip(cands, scores) if s[3] - best <= info.tie_tol]
    tied.sort(key=lambda t3: (round(t3[0], 12), t3[1]))
    _, _, choice = tied[0]
    return robot.moved_to(choice, t)
