"""Experiment configuration: TOML file <-> nested dataclasses.

Sections mirror the package modules::

    [harness]            n_trials, base_seed, out_dir, t_warm, planner, decimate
    [grid_world]         path, spawn (optional list of [x, y]), spawn_margin
    [plume_sim]          PlumeParams fields
    [sensors]            SensorNoise fields
    [source_estimator]   EstimatorParams fields
    [langevin_planner]   PlannerParams fields
    [team_coordinator]   TeamConfig fields (``tau`` sets a homogeneous ladder)
    [baselines.surge_cast], [baselines.infotaxis]

Relative ``grid_world.path`` values resolve against the config file's directory.
"""
from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .baselines import InfotaxisParams, SurgeCastParams
from .errors import ConfigError, GSLError
from .estimator import EstimatorParams
from .langevin import PlannerParams
from .plume import PlumeParams
from .sensors import SensorNoise
from .team import PLANNERS, TeamConfig


@dataclass
class ExperimentConfig:
    world_path: str
    plume: PlumeParams = field(default_factory=PlumeParams)
    sensors: SensorNoise = field(default_factory=SensorNoise)
    estimator: EstimatorParams = field(default_factory=EstimatorParams)
    planner: str = "sniffysquad"
    planner_params: PlannerParams = field(default_factory=PlannerParams)
    team: TeamConfig = field(default_factory=TeamConfig)
    surge_cast: SurgeCastParams = field(default_factory=SurgeCastParams)
    infotaxis: InfotaxisParams = field(default_factory=InfotaxisParams)
    n_trials: int = 50
    base_seed: int = 0
    out_dir: str = "results"
    t_warm: float = 60.0
    spawn: list | None = None
    spawn_margin: float = 1.0
    decimate: int = 10

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError("harness.n_trials: must be >= 1")
        if self.planner not in PLANNERS:
            raise ConfigError(f"harness.planner: {self.planner!r} is not one of {PLANNERS}")
        if not Path(self.world_path).is_file():
            raise ConfigError(f"grid_world.path: world file {self.world_path} does not exist")

    def to_dict(self) -> dict:
        return {
            "harness": {
                "n_trials": self.n_trials, "base_seed": self.base_seed, "out_dir": self.out_dir,
                "t_warm": self.t_warm, "planner": self.planner, "decimate": self.decimate,
            },
            "grid_world": {
                "path": self.world_path, "spawn_margin": self.spawn_margin,
                **({"spawn": self.spawn} if self.spawn is not None else {}),
            },
            "plume_sim": _asdict(self.plume),
            "sensors": _asdict(self.sensors),
            "source_estimator": _asdict(self.estimator),
            "langevin_planner": _asdict(self.planner_params),
            "team_coordinator": _asdict(self.team),
            "baselines": {"surge_cast": _asdict(self.surge_cast), "infotaxis": _asdict(self.infotaxis)},
        }

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        d = self.to_dict()
        for key, value in overrides.items():
            set_key(d, key, value)
        return from_dict(d, base_dir=None)


def _asdict(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = list(v)
        out[f.name] = copy.deepcopy(v)
    return out


def _build(cls, section: str, values: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"[{section}] unknown key(s): {', '.join(sorted(unknown))}")
    try:
        return cls(**values)
    except (TypeError, ValueError, GSLError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def set_key(d: dict, dotted: str, value) -> None:
    """Set ``section.key`` (or ``baselines.x.key``) inside a raw config dict."""
    parts = dotted.split(".")
    if len(parts) < 2:
        raise ConfigError(f"override key {dotted!r} must look like section.key")
    if parts[0] == "team_coordinator" and parts[1] == "tau":
        team = d.setdefault("team_coordinator", {})
        m = int(team.get("M", TeamConfig().M))
        team["temperatures"] = [float(value)] * m
        return
    node = d
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def from_dict(d: dict, base_dir: Path | None) -> ExperimentConfig:
    d = copy.deepcopy(d)
    known = {"harness", "grid_world", "plume_sim", "sensors", "source_estimator",
             "langevin_planner", "team_coordinator", "baselines"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    h = d.get("harness", {})
    gw = d.get("grid_world", {})
    if "path" not in gw:
        raise ConfigError("[grid_world] path: required")
    world_path = Path(gw.pop("path"))
    if base_dir is not None and not world_path.is_absolute():
        world_path = base_dir / world_path
    spawn = gw.pop("spawn", None)
    spawn_margin = gw.pop("spawn_margin", 1.0)
    if gw:
        raise ConfigError(f"[grid_world] unknown key(s): {', '.join(sorted(gw))}")

    team = dict(d.get("team_coordinator", {}))
    if "tau" in team:
        tau = float(team.pop("tau"))
        team["temperatures"] = [tau] * int(team.get("M", TeamConfig().M))
    if "M" in team and "temperatures" not in team:
        raise ConfigError("[team_coordinator] temperatures: required when M is set")

    base = d.get("baselines", {})
    bad = set(base) - {"surge_cast", "infotaxis"}
    if bad:
        raise ConfigError(f"[baselines] unknown subsection(s): {', '.join(sorted(bad))}")
    harness_keys = {"n_trials", "base_seed", "out_dir", "t_warm", "planner", "decimate"}
    bad = set(h) - harness_keys
    if bad:
        raise ConfigError(f"[harness] unknown key(s): {', '.join(sorted(bad))}")
    try:
        return ExperimentConfig(
            world_path=str(world_path),
            plume=_build(PlumeParams, "plume_sim", d.get("plume_sim", {})),
            sensors=_build(SensorNoise, "sensors", d.get("sensors", {})),
            estimator=_build(EstimatorParams, "source_estimator", d.get("source_estimator", {})),
            planner=h.get("planner", "sniffysquad"),
            planner_params=_build(PlannerParams, "langevin_planner", d.get("langevin_planner", {})),
            team=_build(TeamConfig, "team_coordinator", team),
            surge_cast=_build(SurgeCastParams, "baselines.surge_cast", base.get("surge_cast", {})),
            infotaxis=_build(InfotaxisParams, "baselines.infotaxis", base.get("infotaxis", {})),
            n_trials=int(h.get("n_trials", 50)),
            base_seed=int(h.get("base_seed", 0)),
            out_dir=str(h.get("out_dir", "results")),
            t_warm=float(h.get("t_warm", 60.0)),
            spawn=spawn,
            spawn_margin=float(spawn_margin),
            decimate=int(h.get("decimate", 10)),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomli.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return from_dict(raw, base_dir=path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
