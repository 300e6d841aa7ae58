"""Filament gas dispersion with a meandering uniform wind.

Each filament is a 2-D Gaussian puff whose variance grows linearly in
time. The puff amplitude falls as (sigma0/sigma)^2 so the integrated mass
of a filament is conserved while it spreads. Wind is a uniform mean flow
plus an Ornstein-Uhlenbeck meander shared by the whole field; every
filament additionally receives independent Gaussian jitter.

Filament storage is columnar (numpy arrays) for speed; :attr:`PlumeState.filaments`
gives a list view for inspection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .grid_world import GridWorld


@dataclass
class PlumeParams:
    mu: float = 10.0  # ppm at a fresh filament's center
    sigma0: float = 0.10  # m
    gamma: float = 0.001  # m^2/s, growth rate of sigma^2 (10 cm^2/s)
    release_rate: float = 10.0  # filaments/s
    mean_wind: tuple[float, float] = (1.0, 0.0)
    turb_sigma: float = 0.3
    ou_theta: float = 0.5
    ou_zeta: float = 0.3
    margin: float = 2.0
    threshold: float = 0.1  # ppm, "zero" concentration
    # Recorded for provenance only; they do not enter the 2-D puff model.
    metadata: dict = field(default_factory=lambda: {
        "pressure_atm": 1.0,
        "temperature_K": 298.0,
        "kinematic_viscosity_m2_s": 1.529e-5,
        "air_density_kg_m3": 1.196,
        "turbulent_kinetic_energy_m2_s2": 3.75e-3,
        "dissipation_rate_m2_s3": 1.25e-2,
    })

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ParameterError("sigma0 must be positive")
        if self.gamma < 0 or self.release_rate < 0 or self.turb_sigma < 0:
            raise ParameterError("gamma, release_rate and turb_sigma must be non-negative")
        if self.ou_theta < 0 or self.ou_zeta < 0:
            raise ParameterError("OU constants must be non-negative")
        self.mean_wind = (float(self.mean_wind[0]), float(self.mean_wind[1]))


@dataclass(frozen=True)
class Filament:
    pos: tuple[float, float]
    sigma: float
    age: float


@dataclass
class WindState:
    mean_wind: np.ndarray
    meander: np.ndarray
    turb_sigma: float

    @property
    def total(self) -> np.ndarray:
        return self.mean_wind + self.meander


@dataclass(eq=False)
class PlumeState:
    params: PlumeParams
    pos: np.ndarray  # (N, 2)
    sigma2: np.ndarray  # (N,)
    age: np.ndarray  # (N,)
    wind: WindState
    sim_time: float
    rng_seed: int
    rng: np.random.Generator = field(repr=False)

    @property
    def release_rate(self) -> float:
        return self.params.release_rate

    @property
    def n_filaments(self) -> int:
        return len(self.sigma2)

    @property
    def filaments(self) -> list[Filament]:
        return [
            Filament((float(p[0]), float(p[1])), math.sqrt(s2), float(a))
            for p, s2, a in zip(self.pos, self.sigma2, self.age)
        ]

    def add_filament(self, pos, sigma: float | None = None, age: float = 0.0) -> None:
        s = self.params.sigma0 if sigma is None else sigma
        self.pos = np.vstack([self.pos, np.asarray(pos, dtype=float)[None, :]])
        self.sigma2 = np.append(self.sigma2, s * s)
        self.age = np.append(self.age, float(age))

    def copy(self) -> "PlumeState":
        rng = np.random.Generator(np.random.PCG64())
        rng.bit_generator.state = self.rng.bit_generator.state
        return PlumeState(
            self.params, self.pos.copy(), self.sigma2.copy(), self.age.copy(),
            WindState(self.wind.mean_wind.copy(), self.wind.meander.copy(), self.wind.turb_sigma),
            self.sim_time, self.rng_seed, rng,
        )


def init_plume(params: PlumeParams, seed: int) -> PlumeState:
    return PlumeState(
        params=params,
        pos=np.zeros((0, 2)),
        sigma2=np.zeros(0),
        age=np.zeros(0),
        wind=WindState(np.array(params.mean_wind, dtype=float), np.zeros(2), params.turb_sigma),
        sim_time=0.0,
        rng_seed=int(seed),
        rng=np.random.default_rng(seed),
    )


def _reflect_axis(world: GridWorld, old: np.ndarray, new: np.ndarray, other: np.ndarray, axis: int):
    """Mirror coordinate ``axis`` of filaments whose move entered a blocked cell.

    ``other`` holds the already-settled perpendicular coordinate. Positions
    outside the world rectangle count as open air.
    """
    cs = world.cell_size
    if axis == 0:
        cols = np.floor(new / cs + 1e-9).astype(int)
        rows = np.floor(other / cs + 1e-9).astype(int)
        n_major, n_minor = world.n_cols, world.n_rows
    else:
        rows = np.floor(new / cs + 1e-9).astype(int)
        cols = np.floor(other / cs + 1e-9).astype(int)
        n_major, n_minor = world.n_rows, world.n_cols
    major = cols if axis == 0 else rows
    minor = rows if axis == 0 else cols
    inside = (major >= 0) & (major < n_major) & (minor >= 0) & (minor < n_minor)
    hit = np.zeros(len(new), dtype=bool)
    hit[inside] = world.occupancy[rows[inside], cols[inside]]
    if not hit.any():
        return new, hit
    old_major = np.floor(old[hit] / cs + 1e-9).astype(int)
    moving_up = new[hit] > old[hit]
    # face of the blocked cell that was crossed
    face = np.where(moving_up, major[hit] * cs, (major[hit] + 1) * cs)
    same = old_major == major[hit]  # started inside the blocked cell: leave it
    out = new.copy()
    out[hit] = np.where(same, old[hit], 2.0 * face - new[hit])
    return out, hit


def step_plume(state: PlumeState, world: GridWorld, dt: float) -> PlumeState:
    """Advance the plume by ``dt`` seconds in place and return it.

    Existing filaments are advected, jittered, grown, bounced off walls and
    culled; the OU meander is stepped; then the Poisson batch of new
    filaments for this interval is emitted at the source.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    p = state.params
    rng = state.rng
    n = state.n_filaments
    wind = state.wind.total.copy()

    if n:
        jitter = rng.standard_normal((n, 2)) * (state.wind.turb_sigma * math.sqrt(dt))
        disp = wind[None, :] * dt + jitter
        # substeps keep each move below half a cell so thin walls cannot be tunnelled
        n_sub = max(1, int(math.ceil(np.abs(disp).max() / (0.5 * world.cell_size))))
        if not world.has_obstacles:
            n_sub = 1
        step = disp / n_sub
        x, y = state.pos[:, 0].copy(), state.pos[:, 1].copy()
        for _ in range(n_sub if world.has_obstacles else 0):
            nx, hit_x = _reflect_axis(world, x, x + step[:, 0], y, axis=0)
            ny, hit_y = _reflect_axis(world, y, y + step[:, 1], nx, axis=1)
            # the rest of the move continues in the mirrored direction
            step[hit_x, 0] *= -1.0
            step[hit_y, 1] *= -1.0
            x, y = nx, ny
        if not world.has_obstacles:
            x, y = x + step[:, 0], y + step[:, 1]
        state.pos = np.column_stack([x, y])
        state.sigma2 = state.sigma2 + p.gamma * dt
        state.age = state.age + dt
        m = p.margin
        keep = (x >= -m) & (x <= world.width_m + m) & (y >= -m) & (y <= world.height_m + m)
        if not keep.all():
            state.pos = state.pos[keep]
            state.sigma2 = state.sigma2[keep]
            state.age = state.age[keep]

    meander = state.wind.meander
    state.wind.meander = (
        meander - p.ou_theta * meander * dt + p.ou_zeta * math.sqrt(dt) * rng.standard_normal(2)
    )

    k = int(rng.poisson(p.release_rate * dt)) if p.release_rate > 0 else 0
    if k:
        src = np.tile(np.asarray(world.source_pos, dtype=float), (k, 1))
        state.pos = np.vstack([state.pos, src])
        state.sigma2 = np.concatenate([state.sigma2, np.full(k, p.sigma0 ** 2)])
        state.age = np.concatenate([state.age, np.zeros(k)])

    state.sim_time += dt
    return state


def concentration_at(state: PlumeState, pos) -> float:
    """Summed puff concentration (ppm) at ``pos``."""
    if state.n_filaments == 0:
        return 0.0
    p = state.params
    d2 = (state.pos[:, 0] - pos[0]) ** 2 + (state.pos[:, 1] - pos[1]) ** 2
    c = p.mu * (p.sigma0 ** 2 / state.sigma2) * np.exp(-d2 / (2.0 * state.sigma2))
    return float(c.sum())


def concentration_field(state: PlumeState, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized concentration at many points; xs/ys broadcast together."""
    xs, ys = np.broadcast_arrays(np.asarray(xs, float), np.asarray(ys, float))
    out = np.zeros(xs.shape)
    if state.n_filaments == 0:
        return out
    p = state.params
    flat_x, flat_y = xs.ravel(), ys.ravel()
    acc = out.ravel()
    amp = p.mu * p.sigma0 ** 2 / state.sigma2
    inv = 1.0 / (2.0 * state.sigma2)
    for i in range(0, state.n_filaments, 512):
        sl = slice(i, i + 512)
        d2 = (flat_x[:, None] - state.pos[sl, 0]) ** 2 + (flat_y[:, None] - state.pos[sl, 1]) ** 2
        acc += (amp[sl] * np.exp(-d2 * inv[sl])).sum(axis=1)
    return acc.reshape(xs.shape)


def wind_at(state: PlumeState, world: GridWorld, pos) -> np.ndarray:
    cell = world.cell_of(pos)
    if world.occupancy[cell.row, cell.col]:
        return np.zeros(2)
    return state.wind.total.copy()


def warm_up(state: PlumeState, world: GridWorld, seconds: float, dt: float) -> PlumeState:
    n = int(round(seconds / dt))
    for _ in range(n):
        step_plume(state, world, dt)
    return state
