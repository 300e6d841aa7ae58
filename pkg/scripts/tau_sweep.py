"""Success rate of a homogeneous team across five orders of magnitude of temperature.

    python scripts/tau_sweep.py --config configs/weak_open.toml --trials 30 --workers 8
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from patchygsl.config import load_config
from patchygsl.harness import run_batch, summarize, write_results

TAUS = [1e-3, 1e-2, 1e-1, 1.0, 10.0]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/weak_open.toml")
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--taus", default=",".join(str(t) for t in TAUS))
    ap.add_argument("--ladder", action="store_true", help="also run the default mixed ladder")
    ap.add_argument("--out", default="results/tau_sweep")
    args = ap.parse_args()

    cfg = load_config(args.config)
    out = Path(args.out)
    rows = []
    runs = [(f"tau={t}", {"team_coordinator.tau": float(t)}) for t in args.taus.split(",")]
    if args.ladder:
        runs.append(("ladder", {}))
    for name, over in runs:
        recs = run_batch(cfg.with_overrides(over) if over else cfg, args.trials, args.seed,
                         workers=args.workers)
        s = summarize(recs)
        write_results(out / name, recs, s)
        rows.append({"run": name, **s.to_dict()})
        print(f"{name:>12}  SR={s.success_rate:.2f}  medPE={s.median_path_efficiency}")
    (out / "sweep.json").write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
