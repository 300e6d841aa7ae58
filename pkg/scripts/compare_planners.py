"""Run SniffySquad, Surge-Cast and Infotaxis on shared seeds and tabulate SR / PE.

    python scripts/compare_planners.py --config configs/weak_open.toml --trials 50 --workers 8
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from patchygsl.config import load_config
from patchygsl.harness import run_batch, summarize, write_results
from patchygsl.team import PLANNERS


def fmt(v, digits=3):
    return "-" if v is None else f"{v:.{digits}f}"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/weak_open.toml")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/compare")
    args = ap.parse_args()

    cfg = load_config(args.config)
    out = Path(args.out)
    table = {}
    for planner in PLANNERS:
        recs = run_batch(cfg.with_overrides({"harness.planner": planner}), args.trials, args.seed,
                         workers=args.workers)
        s = summarize(recs)
        write_results(out / planner, recs, s, extra={"planner": planner})
        table[planner] = s.to_dict()
    (out / "compare.json").write_text(json.dumps(table, indent=2) + "\n")
    print("| planner | success rate | median PE | mean PE | mean time (s) |")
    print("|---|---|---|---|---|")
    for p, s in table.items():
        print(f"| {p} | {s['success_rate']:.2f} | {fmt(s['median_path_efficiency'])} | "
              f"{fmt(s['mean_path_efficiency'])} | {fmt(s['mean_search_time'], 1)} |")


if __name__ == "__main__":
    main()
