"""Team coordination: temperature roles, replica-exchange swaps, the per-tick loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .baselines import (InfotaxisParams, SurgeCastParams, SurgeCastState, infotaxis_step,
                        surge_cast_step)
from .errors import ParameterError
from .estimator import (BeliefMap, EstimatorParams, PotentialField, apply_measurement,
                        phi_at, potential_of)
from .grid_world import GridWorld
from .langevin import PlannerParams, RobotState, langevin_step
from .plume import PlumeState, step_plume
from .sensors import Measurement, SensorNoise, sense

PLANNERS = ("sniffysquad", "surge_cast", "infotaxis")


@dataclass
class TeamConfig:
    M: int = 3
    temperatures: list[float] = field(default_factory=lambda: [0.01, 0.1, 1.0])
    a: float = 1.0
    d_eps: float = 0.5
    t_limit: float = 600.0

    def __post_init__(self):
        self.temperatures = [float(t) for t in self.temperatures]
        if self.M < 1:
            raise ParameterError("team needs at least one robot")
        if len(self.temperatures) != self.M:
            raise ParameterError(f"{len(self.temperatures)} temperatures for {self.M} robots")
        if any(t <= 0 for t in self.temperatures):
            raise ParameterError("temperatures must be positive")
        if self.a < 0:
            raise ParameterError("swap intensity a must be >= 0")
        if self.d_eps <= 0:
            raise ParameterError("d_eps must be positive")


@dataclass(frozen=True)
class SwapEvent:
    time: float
    i: int
    j: int
    rate: float
    accepted: bool


@dataclass(frozen=True)
class Outcome:
    kind: str  # "running" | "success" | "timeout"
    robot: int | None = None

    @property
    def running(self) -> bool:
        return self.kind == "running"


RUNNING = Outcome("running")


def swap_rate(tau_i: float, tau_j: float, phi_i: float, phi_j: float, a: float = 1.0) -> float:
    """a * exp(min(0, (1/tau_i - 1/tau_j) * (phi_i - phi_j))), clipped to [0, 1]."""
    if tau_i <= 0 or tau_j <= 0:
        raise ParameterError(f"temperatures must be positive, got {tau_i}, {tau_j}")
    if a == 0:
        return 0.0
    expo = (1.0 / tau_i - 1.0 / tau_j) * (phi_i - phi_j)
    if math.isnan(expo):
        # inf - inf or 0 * inf: equal temperatures carry no preference
        expo = 0.0
    s = a * math.exp(min(0.0, expo))
    return min(1.0, max(0.0, s))


def adapt_roles(robots: list[RobotState], field_or_phi, a: float, rng: np.random.Generator,
                time: float = 0.0):
    """One round of pairwise temperature swaps over (i, j), i < j, in id order.

    ``field_or_phi`` is a PotentialField or a callable robot -> phi. Swaps
    take effect immediately, so later pairs see already-exchanged temperatures.
    """
    if callable(field_or_phi):
        phi_of = field_or_phi
    else:
        phi_of = lambda r: phi_at(field_or_phi, r.pos)  # noqa: E731
    robots = list(robots)
    phis = [phi_of(r) for r in robots]
    events = []
    for i in range(len(robots)):
        for j in range(i + 1, len(robots)):
            ri, rj = robots[i], robots[j]
            s = swap_rate(ri.tau, rj.tau, phis[i], phis[j], a)
            u = rng.random()
            ok = u <= s
            if ok:
                robots[i] = RobotState(ri.id, ri.pos, rj.tau, ri.trajectory, ri.path_len)
                robots[j] = RobotState(rj.id, rj.pos, ri.tau, rj.trajectory, rj.path_len)
            events.append(SwapEvent(time, ri.id, rj.id, s, ok))
    return robots, events


def check_termination(robots, world: GridWorld, elapsed: float, cfg: TeamConfig) -> Outcome:
    sx, sy = world.source_pos
    for r in sorted(robots, key=lambda r: r.id):
        if math.hypot(r.pos[0] - sx, r.pos[1] - sy) <= cfg.d_eps:
            return Outcome("success", r.id)
    if elapsed >= cfg.t_limit:
        return Outcome("timeout")
    return RUNNING


def reached(robot: RobotState, world: GridWorld, d_eps: float) -> bool:
    return math.dist(robot.pos, world.source_pos) <= d_eps


# -- simulation state --------------------------------------------------------
@dataclass(eq=False)
class Sim:
    world: GridWorld
    plume: PlumeState
    belief: BeliefMap
    robots: list[RobotState]
    team: TeamConfig
    planner: str = "sniffysquad"
    planner_params: PlannerParams = field(default_factory=PlannerParams)
    est_params: EstimatorParams = field(default_factory=EstimatorParams)
    noise: SensorNoise = field(default_factory=SensorNoise)
    surge_params: SurgeCastParams = field(default_factory=SurgeCastParams)
    info_params: InfotaxisParams = field(default_factory=InfotaxisParams)
    sensor_rngs: list = field(default_factory=list)
    motion_rngs: list = field(default_factory=list)
    swap_rng: np.random.Generator | None = None
    surge_states: list = field(default_factory=list)
    elapsed: float = 0.0
    swap_events: list = field(default_factory=list)
    outcome: Outcome = RUNNING
    field: PotentialField | None = None
    phase_log: list | None = None
    on_belief: Callable | None = None  # called with (sim) after each belief refresh

    def __post_init__(self):
        if self.planner not in PLANNERS:
            raise ParameterError(f"unknown planner {self.planner!r}; expected one of {PLANNERS}")
        self.planner_params = self.planner_params.resolved(self.world)
        if not self.surge_states:
            self.surge_states = [SurgeCastState.from_params(self.surge_params) for _ in self.robots]

    def log(self, phase: str) -> None:
        if self.phase_log is not None:
            self.phase_log.append(phase)

    @property
    def uses_belief(self) -> bool:
        return self.planner != "surge_cast"


def make_rngs(seed: int, M: int):
    """Independent streams: plume, swap, and one sensor + one motion stream per robot."""
    ss = np.random.SeedSequence(seed)
    kids = ss.spawn(2 + 2 * M)
    gens = [np.random.Generator(np.random.PCG64(k)) for k in kids]
    return {
        "plume": gens[0],
        "swap": gens[1],
        "sensor": gens[2:2 + M],
        "motion": gens[2 + M:],
    }


def run_tick(sim: Sim) -> Outcome:
    """One pass of sense -> update belief -> potential -> swap roles -> move -> advance plume."""
    if not sim.outcome.running:
        return sim.outcome
    dt = sim.planner_params.dt
    now = sim.elapsed

    sim.log("sense")
    measurements: list[Measurement] = [
        sense(sim.plume, sim.world, r.pos, sim.sensor_rngs[k], sim.noise, time=now)
        for k, r in enumerate(sim.robots)
    ]

    sim.log("update_belief")
    if sim.uses_belief:
        for m in measurements:
            sim.belief = apply_measurement(sim.belief, m, sim.world, sim.est_params)

    sim.log("potential")
    if sim.planner == "sniffysquad":
        sim.field = potential_of(sim.belief, sim.world)
    if sim.on_belief is not None:
        sim.on_belief(sim)

    sim.log("adapt_roles")
    if sim.planner == "sniffysquad" and len(sim.robots) > 1:
        sim.robots, events = adapt_roles(sim.robots, sim.field, sim.team.a, sim.swap_rng, now)
        sim.swap_events.extend(events)

    sim.log("move")
    t_next = now + dt
    for k in range(len(sim.robots)):
        r = sim.robots[k]
        if sim.planner == "sniffysquad":
            r = langevin_step(r, sim.field, sim.planner_params, sim.world, sim.motion_rngs[k], time=t_next)
        elif sim.planner == "surge_cast":
            r, sim.surge_states[k] = surge_cast_step(r, measurements[k], sim.surge_states[k],
                                                     sim.planner_params, sim.world, time=t_next)
        else:
            r = infotaxis_step(r, sim.belief, sim.world, sim.planner_params, sim.motion_rngs[k],
                               sim.info_params, sim.est_params, time=t_next)
        sim.robots[k] = r
        if reached(r, sim.world, sim.team.d_eps):
            sim.elapsed = t_next
            sim.outcome = Outcome("success", r.id)
            sim.log("terminate")
            return sim.outcome

    sim.log("advance_plume")
    step_plume(sim.plume, sim.world, dt)
    sim.elapsed = t_next

    sim.log("terminate")
    sim.outcome = check_termination(sim.robots, sim.world, sim.elapsed, sim.team)
    return sim.outcome


# -- replica exchange on analytic potentials ---------------------------------
def replica_exchange_chains(phi: Callable, grad: Callable, x0: np.ndarray, taus, eta: float,
                            a: float, n_steps: int, rng: np.random.Generator,
                            record: Callable | None = None):
    """Vectorized replica-exchange Langevin on a 1-D potential.

    ``x0`` has shape (R, M): R independent replicates of an M-chain team.
    Temperatures live in ``tau`` (same shape) and move between chains on
    swaps; positions never jump. ``record(step, x, tau)`` is called after
    every step. Returns final (x, tau).
    """
    x = np.array(x0, dtype=float)
    tau = np.broadcast_to(np.asarray(taus, dtype=float), x.shape).copy()
    R, M = x.shape
    for step in range(n_steps):
        if a > 0 and M > 1:
            ph = phi(x)
            for i in range(M):
                for j in range(i + 1, M):
                    expo = (1.0 / tau[:, i] - 1.0 / tau[:, j]) * (ph[:, i] - ph[:, j])
                    s = np.minimum(1.0, a * np.exp(np.minimum(0.0, expo)))
                    u = rng.random(R)
                    sw = u <= s
                    ti = tau[sw, i].copy()
                    tau[sw, i] = tau[sw, j]
                    tau[sw, j] = ti
        x = x - eta * grad(x) + np.sqrt(2.0 * eta * tau) * rng.standard_normal(x.shape)
        if record is not None and record(step, x, tau):
            break
    return x, tau
