"""Seeded trial runner, metrics and batch I/O."""
from __future__ import annotations

import csv
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import UsageError
from .estimator import init_belief
from .grid_world import GridWorld, load_world
from .langevin import RobotState
from .plume import init_plume, warm_up
from .team import Sim, check_termination, make_rngs, run_tick


@dataclass
class TrialRecord:
    seed: int
    outcome: str  # "success" | "timeout"
    success_robot: int | None
    elapsed: float
    path_lens: list[float]
    d_min: float
    swap_events: int
    swaps_accepted: int
    starts: list[list[float]]
    finals: list[list[float]]
    trajectories: list[list[list[float]]] = field(default_factory=list)  # decimated [t, x, y]

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrialRecord":
        return cls(**json.loads(text))


@dataclass
class BatchSummary:
    n_trials: int
    successes: int
    success_rate: float
    mean_path_efficiency: float | None
    median_path_efficiency: float | None
    mean_search_time: float | None
    rows: list[dict] = field(default_factory=list)

    def to_dict(self, with_rows: bool = False) -> dict:
        d = asdict(self)
        if not with_rows:
            d.pop("rows")
        return d


# -- setup ---------------------------------------------------------------
_WORLD_CACHE: dict[str, GridWorld] = {}


def get_world(path: str) -> GridWorld:
    w = _WORLD_CACHE.get(path)
    if w is None:
        w = _WORLD_CACHE[path] = load_world(path)
    return w


def nearest_free(world: GridWorld, pos) -> tuple[float, float]:
    if world.is_free_pos(pos):
        return (float(pos[0]), float(pos[1]))
    X, Y = world.centers
    d2 = np.where(world.free, (X - pos[0]) ** 2 + (Y - pos[1]) ** 2, np.inf)
    r, c = np.unravel_index(int(np.argmin(d2)), d2.shape)
    return world.cell_center((c, r))


def spawn_positions(world: GridWorld, cfg: ExperimentConfig) -> list[tuple[float, float]]:
    """Evenly spaced along the downwind edge unless the config lists positions."""
    M = cfg.team.M
    if cfg.spawn is not None:
        if len(cfg.spawn) != M:
            raise UsageError(f"grid_world.spawn lists {len(cfg.spawn)} positions for {M} robots")
        return [nearest_free(world, p) for p in cfg.spawn]
    wx, wy = cfg.plume.mean_wind
    m = cfg.spawn_margin
    out = []
    for k in range(M):
        frac = (k + 1) / (M + 1)
        if abs(wx) >= abs(wy):
            x = world.width_m - m if wx >= 0 else m
            p = (x, frac * world.height_m)
        else:
            y = world.height_m - m if wy >= 0 else m
            p = (frac * world.width_m, y)
        out.append(nearest_free(world, p))
    return out


def build_sim(cfg: ExperimentConfig, seed: int, world: GridWorld | None = None) -> Sim:
    world = world or get_world(cfg.world_path)
    rngs = make_rngs(seed, cfg.team.M)
    plume = init_plume(cfg.plume, 0)
    plume.rng = rngs["plume"]
    plume.rng_seed = int(seed)
    pp = cfg.planner_params.resolved(world)
    warm_up(plume, world, cfg.t_warm, pp.dt)
    robots = [RobotState(i, p, cfg.team.temperatures[i])
              for i, p in enumerate(spawn_positions(world, cfg))]
    return Sim(
        world=world, plume=plume, belief=init_belief(world, cfg.estimator), robots=robots,
        team=cfg.team, planner=cfg.planner, planner_params=pp, est_params=cfg.estimator,
        noise=cfg.sensors, surge_params=cfg.surge_cast, info_params=cfg.infotaxis,
        sensor_rngs=rngs["sensor"], motion_rngs=rngs["motion"], swap_rng=rngs["swap"],
    )


def run_sim(sim: Sim) -> None:
    sim.outcome = check_termination(sim.robots, sim.world, sim.elapsed, sim.team)
    while sim.outcome.running:
        run_tick(sim)


def record_of(sim: Sim, seed: int, decimate: int = 10) -> TrialRecord:
    world = sim.world
    robots = sorted(sim.robots, key=lambda r: r.id)
    ref = sim.outcome.robot if sim.outcome.kind == "success" else 0
    d_min = world.shortest_path_len(robots[ref].start, world.source_pos)
    trajs = []
    for r in robots:
        tr = r.trajectory
        keep = tr[::max(1, decimate)]
        if keep[-1] is not tr[-1]:
            keep = keep + [tr[-1]]
        trajs.append([[t, p[0], p[1]] for t, p in keep])
    return TrialRecord(
        seed=int(seed),
        outcome=sim.outcome.kind,
        success_robot=sim.outcome.robot,
        elapsed=float(sim.elapsed),
        path_lens=[float(r.path_len) for r in robots],
        d_min=float(d_min),
        swap_events=len(sim.swap_events),
        swaps_accepted=sum(1 for e in sim.swap_events if e.accepted),
        starts=[list(r.start) for r in robots],
        finals=[list(r.pos) for r in robots],
        trajectories=trajs,
    )


def run_trial(cfg: ExperimentConfig, seed: int, world: GridWorld | None = None,
              sim_hook=None) -> TrialRecord:
    """Run one seeded trial to success or timeout.

    ``sim_hook(sim)`` is called once after setup (replay uses it to attach
    belief dumps and keep full trajectories).
    """
    sim = build_sim(cfg, seed, world)
    if sim_hook is not None:
        sim_hook(sim)
    run_sim(sim)
    return record_of(sim, seed, cfg.decimate)


def path_efficiency(rec: TrialRecord) -> float:
    if not rec.success:
        raise UsageError(f"path efficiency is undefined for a {rec.outcome} trial (seed {rec.seed})")
    d = rec.path_lens[rec.success_robot]
    if d <= 0:
        return 1.0
    return rec.d_min / d


def summarize(records: list[TrialRecord]) -> BatchSummary:
    if not records:
        raise UsageError("cannot summarize an empty batch")
    records = sorted(records, key=lambda r: r.seed)
    ok = [r for r in records if r.success]
    pe = [path_efficiency(r) for r in ok]
    rows = [csv_row(r) for r in records]
    return BatchSummary(
        n_trials=len(records),
        successes=len(ok),
        success_rate=len(ok) / len(records),
        mean_path_efficiency=statistics.fmean(pe) if pe else None,
        median_path_efficiency=statistics.median(pe) if pe else None,
        mean_search_time=statistics.fmean(r.elapsed for r in ok) if ok else None,
        rows=rows,
    )


# -- batches -------------------------------------------------------------
def _trial_job(args):
    cfg, seed = args
    return run_trial(cfg, seed)


def run_batch(cfg: ExperimentConfig, n_trials: int | None = None, base_seed: int | None = None,
              workers: int = 1, progress=None) -> list[TrialRecord]:
    """Trials with seeds base_seed + k; results sorted by seed whatever the worker count."""
    n = cfg.n_trials if n_trials is None else n_trials
    base = cfg.base_seed if base_seed is None else base_seed
    jobs = [(cfg, base + k) for k in range(n)]
    if workers <= 1:
        out = []
        for j in jobs:
            out.append(_trial_job(j))
            if progress:
                progress(out[-1])
    else:
        out = []
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for rec in ex.map(_trial_job, jobs, chunksize=1):
                out.append(rec)
                if progress:
                    progress(rec)
    return sorted(out, key=lambda r: r.seed)


CSV_FIELDS = ("seed", "outcome", "success_robot", "elapsed", "d_min", "path_efficiency",
              "swap_events", "swaps_accepted", "path_lens")


def csv_row(rec: TrialRecord) -> dict:
    return {
        "seed": rec.seed,
        "outcome": rec.outcome,
        "success_robot": "" if rec.success_robot is None else rec.success_robot,
        "elapsed": repr(rec.elapsed),
        "d_min": repr(rec.d_min),
        "path_efficiency": repr(path_efficiency(rec)) if rec.success else "",
        "swap_events": rec.swap_events,
        "swaps_accepted": rec.swaps_accepted,
        "path_lens": ";".join(repr(v) for v in rec.path_lens),
    }


def write_results(out_dir, records: list[TrialRecord], summary: BatchSummary | None = None,
                  extra: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = sorted(records, key=lambda r: r.seed)
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for r in records:
            w.writerow(csv_row(r))
    summary = summary or summarize(records)
    payload = summary.to_dict()
    if extra:
        payload.update(extra)
    (out / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return out


def read_results_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "seed": int(row["seed"]),
                "outcome": row["outcome"],
                "success_robot": int(row["success_robot"]) if row["success_robot"] else None,
                "elapsed": float(row["elapsed"]),
                "d_min": float(row["d_min"]),
                "path_efficiency": float(row["path_efficiency"]) if row["path_efficiency"] else None,
                "swap_events": int(row["swap_events"]),
                "swaps_accepted": int(row["swaps_accepted"]),
                "path_lens": [float(v) for v in row["path_lens"].split(";")],
            })
    return rows


def write_trajectory(path, sim: Sim) -> None:
    """Full-resolution trajectories: one row per (robot, sample)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["robot", "time", "x", "y"])
        for r in sorted(sim.robots, key=lambda r: r.id):
            for t, (x, y) in r.trajectory:
                w.writerow([r.id, repr(t), repr(x), repr(y)])


def read_trajectory(path) -> dict[int, list[tuple[float, float, float]]]:
    out: dict[int, list] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(int(row["robot"]), []).append(
                (float(row["time"]), float(row["x"]), float(row["y"])))
    return out


def polyline_length(points) -> float:
    total = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        total += math.hypot(x1 - x0, y1 - y0)
    return total
