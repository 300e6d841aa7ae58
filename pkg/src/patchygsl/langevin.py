"""Langevin-dynamics motion for a single robot.

The robot follows the Euler-Maruyama discretization of
dx = -grad(phi) dt + sqrt(2 tau) dB, with the drift clamped to the robot's
top speed and the step cut short at walls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import GSLError, ParameterError
from .estimator import PotentialField, grad_phi
from .grid_world import GridWorld


@dataclass
class PlannerParams:
    eta: float | None = None  # None -> 0.5 * cell_size**2
    h: float | None = None  # None -> cell_size
    v_max: float = 0.5
    dt: float = 0.5
    noise_cap: float = 2.0
    wall_margin_frac: float = 0.01

    def resolved(self, world: GridWorld) -> "PlannerParams":
        eta = 0.5 * world.cell_size ** 2 if self.eta is None else self.eta
        h = world.cell_size if self.h is None else self.h
        out = replace(self, eta=float(eta), h=float(h))
        if min(out.eta, out.h, out.v_max, out.dt) <= 0:
            raise ParameterError("eta, h, v_max and dt must all be positive")
        return out


@dataclass(eq=False)
class RobotState:
    id: int
    pos: tuple[float, float]
    tau: float
    trajectory: list = field(default_factory=list)  # [(time, (x, y)), ...]
    path_len: float = 0.0

    def __post_init__(self):
        self.pos = (float(self.pos[0]), float(self.pos[1]))
        if not self.tau > 0:
            raise ParameterError(f"robot {self.id}: tau must be positive, got {self.tau}")
        if not self.trajectory:
            self.trajectory = [(0.0, self.pos)]

    def moved_to(self, pos, time: float) -> "RobotState":
        pos = (float(pos[0]), float(pos[1]))
        seg = math.hypot(pos[0] - self.pos[0], pos[1] - self.pos[1])
        return RobotState(self.id, pos, self.tau, self.trajectory + [(float(time), pos)],
                          self.path_len + seg)

    @property
    def start(self) -> tuple[float, float]:
        return self.trajectory[0][1]


def trajectory_length(trajectory) -> float:
    pts = np.array([p for _, p in trajectory], dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


def clamp_norm(v: np.ndarray, limit: float) -> np.ndarray:
    n = float(np.hypot(v[0], v[1]))
    if n > limit and n > 0:
        return v * (limit / n)
    return v


def move_with_walls(robot: RobotState, disp: np.ndarray, world: GridWorld, margin: float,
                    time: float) -> RobotState:
    target = np.asarray(robot.pos) + disp
    end = world.clip_segment(robot.pos, target, margin)
    return robot.moved_to(end, time)


def langevin_step(robot: RobotState, field: PotentialField, params: PlannerParams,
                  world: GridWorld, rng: np.random.Generator, time: float | None = None,
                  tau: float | None = None) -> RobotState:
    """One planning step for ``robot``; ``params`` must already be resolved."""
    tau = robot.tau if tau is None else tau
    g = grad_phi(field, robot.pos, params.h, world)
    if not np.all(np.isfinite(g)):
        raise GSLError(f"non-finite potential gradient at {robot.pos}")
    limit = params.v_max * params.dt
    drift = clamp_norm(-params.eta * g, limit)
    xi = rng.standard_normal(2)
    disp = drift + math.sqrt(2.0 * params.eta * tau) * xi
    disp = clamp_norm(disp, params.noise_cap * limit)
    t = robot.trajectory[-1][0] + params.dt if time is None else time
    return move_with_walls(robot, disp, world, params.wall_margin_frac * world.cell_size, t)


# -- analytic-potential samplers (used for the stationarity checks) -------
def sample_chain(grad: Callable[[float], float], x0: float, eta: float, tau: float,
                 n_steps: int, rng: np.random.Generator, burn_in: int = 0,
                 chunk: int = 65536) -> np.ndarray:
    """Scalar Euler-Maruyama chain x <- x - eta*grad(x) + sqrt(2*eta*tau)*xi.

    Returns the ``n_steps`` states recorded after ``burn_in`` discarded ones.
    """
    scale = math.sqrt(2.0 * eta * tau)
    out = np.empty(n_steps)
    x = float(x0)
    total = burn_in + n_steps
    k = 0
    while k < total:
        m = min(chunk, total - k)
        noise = (rng.standard_normal(m) * scale).tolist()
        for j in range(m):
            x = x - eta * grad(x) + noise[j]
            idx = k + j - burn_in
            if idx >= 0:
                out[idx] = x
        k += m
    return out


def sample_chains(grad: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, eta: float,
                  tau, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized independent chains; returns the final states."""
    x = np.array(x0, dtype=float)
    scale = np.sqrt(2.0 * eta * np.asarray(tau, dtype=float))
    for _ in range(n_steps):
        x = x - eta * grad(x) + scale * rng.standard_normal(x.shape)
    return x
