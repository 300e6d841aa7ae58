"""Noisy concentration and anemometer readings."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid_world import GridWorld
from .plume import PlumeState, concentration_at, wind_at


@dataclass
class SensorNoise:
    conc_rel_std: float = 0.05
    wind_dir_std_deg: float = 5.0
    wind_mag_rel_std: float = 0.05


@dataclass(frozen=True)
class Measurement:
    conc: float
    wind: tuple[float, float]
    pos: tuple[float, float]
    time: float


def sense(plume: PlumeState, world: GridWorld, pos, rng: np.random.Generator,
          noise: SensorNoise | None = None, time: float | None = None) -> Measurement:
    """Read concentration and wind at ``pos``.

    Three normals are always drawn (concentration, heading, magnitude) so the
    rng stream advances identically whatever the noise settings.
    """
    noise = noise or SensorNoise()
    world.require_free(pos)
    e_c, e_dir, e_mag = rng.standard_normal(3)
    conc = max(0.0, concentration_at(plume, pos) * (1.0 + noise.conc_rel_std * e_c))
    u, v = wind_at(plume, world, pos)
    theta = math.radians(noise.wind_dir_std_deg) * e_dir
    scale = 1.0 + noise.wind_mag_rel_std * e_mag
    c, s = math.cos(theta), math.sin(theta)
    wind = (scale * (c * u - s * v), scale * (s * u + c * v))
    t = plume.sim_time if time is None else time
    return Measurement(conc=float(conc), wind=(float(wind[0]), float(wind[1])),
                       pos=(float(pos[0]), float(pos[1])), time=float(t))
