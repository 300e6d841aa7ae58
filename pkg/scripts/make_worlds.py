"""Write the bundled ASCII world files into configs/worlds/."""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from patchygsl.grid_world import GridWorld


def open_world(w, h, cs, source):
    occ = np.zeros((round(h / cs), round(w / cs)), dtype=bool)
    return GridWorld(w, h, cs, occ, source)


def rooms_world(w, h, cs, source, walls):
    """walls: list of (x0, y0, x1, y1, door_lo, door_hi) axis-aligned segments in meters.

    A vertical wall has x0 == x1 and its door spans y in [door_lo, door_hi];
    a horizontal wall likewise along x.
    """
    occ = np.zeros((round(h / cs), round(w / cs)), dtype=bool)
    for x0, y0, x1, y1, lo, hi in walls:
        if x0 == x1:
            c = int(x0 / cs)
            for r in range(int(y0 / cs), int(y1 / cs)):
                y = (r + 0.5) * cs
                if not lo <= y <= hi:
                    occ[r, c] = True
        else:
            r = int(y0 / cs)
            for c in range(int(x0 / cs), int(x1 / cs)):
                x = (c + 0.5) * cs
                if not lo <= x <= hi:
                    occ[r, c] = True
    return GridWorld(w, h, cs, occ, source)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="configs/worlds")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    worlds = {
        "open_40x24.txt": open_world(40, 24, 0.2, (6.1, 12.1)),
        "rooms_40x24.txt": rooms_world(40, 24, 0.2, (6.1, 12.1), [
            (14, 0, 14, 24, 9.0, 15.0),
            (26, 0, 26, 24, 3.0, 8.0),
            (26, 12, 40, 12, 30.0, 34.0),
        ]),
        "open_100x60.txt": open_world(100, 60, 0.5, (10.25, 30.25)),
        "rooms_100x100.txt": rooms_world(100, 100, 0.5, (10.25, 50.25), [
            (30, 0, 30, 100, 40.0, 60.0),
            (60, 0, 60, 100, 15.0, 30.0),
            (60, 50, 100, 50, 75.0, 85.0),
            (30, 80, 60, 80, 40.0, 48.0),
        ]),
    }
    for name, w in worlds.items():
        (out / name).write_text(w.to_text())
        print(f"wrote {out / name} ({w.n_cols}x{w.n_rows} cells, {w.n_free} free)")


if __name__ == "__main__":
    main()
