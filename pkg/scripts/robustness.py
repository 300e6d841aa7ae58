"""Source strength x environment grid for every planner (weak/strong, open/rooms).

    python scripts/robustness.py --trials 20 --workers 8
"""
from __future__ import annotations

import argparse
import itertools
import json
from pathlib import Path

from patchygsl.config import load_config
from patchygsl.harness import run_batch, summarize
from patchygsl.team import PLANNERS

WORLDS = {"open": "configs/weak_open.toml", "rooms": "configs/weak_rooms.toml"}
RATES = {"weak": 10.0, "strong": 30.0}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/robustness.json")
    args = ap.parse_args()

    rows = []
    for (wname, path), (sname, rate), planner in itertools.product(WORLDS.items(), RATES.items(), PLANNERS):
        cfg = load_config(path).with_overrides({"plume_sim.release_rate": rate, "harness.planner": planner})
        s = summarize(run_batch(cfg, args.trials, args.seed, workers=args.workers))
        rows.append({"world": wname, "source": sname, "planner": planner, **s.to_dict()})
        print(f"{wname:>5} {sname:>6} {planner:>11}  SR={s.success_rate:.2f}  "
              f"medPE={s.median_path_efficiency}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
