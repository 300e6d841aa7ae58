"""Command-line entry point: run, replay, sweep, compare.

Exit codes: 0 on success, 2 on usage or configuration errors, 1 on any
other runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import tomli

from .config import ExperimentConfig, load_config
from .errors import ConfigError, UsageError
from .harness import (build_sim, record_of, run_batch, run_sim, summarize, write_results,
                      write_trajectory)
from .team import PLANNERS

log = logging.getLogger("patchygsl")


def _parse_value(text: str):
    """TOML scalar syntax (1e-2, true, "x", [1, 2]); bare words stay strings."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    over = {}
    if getattr(args, "world", None):
        over["grid_world.path"] = str(Path(args.world).resolve())
    for item in getattr(args, "set", None) or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        over[key] = _parse_value(val)
    return cfg.with_overrides(over) if over else cfg


def _progress(total: int):
    done = [0]

    def cb(rec):
        done[0] += 1
        log.info("trial %d/%d seed=%d %s t=%.1f", done[0], total, rec.seed, rec.outcome, rec.elapsed)
    return cb


def _batch(cfg: ExperimentConfig, args, out: Path) -> dict:
    n = args.trials or cfg.n_trials
    seed = cfg.base_seed if args.seed is None else args.seed
    recs = run_batch(cfg, n, seed, workers=args.workers, progress=_progress(n))
    summary = summarize(recs)
    write_results(out, recs, summary, extra={"planner": cfg.planner, "base_seed": seed})
    return summary.to_dict()


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out or cfg.out_dir)
    s = _batch(cfg, args, out)
    print(json.dumps(s, sort_keys=True))
    return 0


def cmd_replay(args) -> int:
    cfg = _load(args)
    out = Path(args.out or cfg.out_dir)
    seed = cfg.base_seed if args.seed is None else args.seed
    sim = build_sim(cfg, seed)
    times = []
    fh = None
    if args.dump_belief:
        out.mkdir(parents=True, exist_ok=True)
        fh = open(out / f"beliefs_{seed}.f64", "wb")

        tick = [0]

        def dump(s):
            tick[0] += 1
            if (tick[0] - 1) % args.dump_every == 0:
                times.append(s.elapsed)
                s.belief.p.astype("<f8").tofile(fh)
        sim.on_belief = dump
    try:
        run_sim(sim)
    finally:
        if fh is not None:
            fh.close()
    rec = record_of(sim, seed, cfg.decimate)
    write_trajectory(out / "trajectories" / f"{seed}.csv", sim)
    (out / f"record_{seed}.json").write_text(rec.to_json() + "\n")
    if fh is not None:
        meta = {"shape": list(sim.belief.p.shape), "dtype": "<f8", "order": "C",
                "frames": len(times), "times": times, "cell_size": sim.world.cell_size}
        (out / f"beliefs_{seed}.json").write_text(json.dumps(meta) + "\n")
    print(json.dumps({"seed": seed, "outcome": rec.outcome, "elapsed": rec.elapsed}))
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = Path(args.out or cfg.out_dir)
    rows = []
    for text in args.values.split(","):
        value = _parse_value(text.strip())
        sub = cfg.with_overrides({args.key: value})
        s = _batch(sub, args, out / f"{args.key}={text.strip()}")
        rows.append({"key": args.key, "value": value, **s})
        log.info("%s=%s success_rate=%.3f", args.key, text, s["success_rate"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps(rows, indent=2) + "\n")
    for r in rows:
        print(json.dumps(r, sort_keys=True))
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args)
    out = Path(args.out or cfg.out_dir)
    result = {}
    for planner in PLANNERS:
        sub = cfg.with_overrides({"harness.planner": planner})
        result[planner] = _batch(sub, args, out / planner)
    (out / "compare.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    print(json.dumps(result, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="patchygsl", description="Multi-robot gas source localization experiments.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log per-trial progress")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, batch=True):
        p.add_argument("--config", required=True, help="experiment TOML file")
        p.add_argument("--world", help="override the world file")
        p.add_argument("--seed", type=int, help="base seed (replay: the trial seed)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key, e.g. team_coordinator.a=0")
        if batch:
            p.add_argument("--trials", type=int, help="trials per batch")
            p.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("run", help="run one batch")
    common(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("replay", help="rerun one seed with full trajectories")
    common(p, batch=False)
    p.add_argument("--dump-belief", action="store_true", help="write belief maps as flat float64")
    p.add_argument("--dump-every", type=int, default=10, metavar="N",
                   help="dump the belief on every N-th tick (default 10)")
    p.set_defaults(func=cmd_replay)
    p = sub.add_parser("sweep", help="vary one config key")
    common(p)
    p.add_argument("--key", required=True, help="dotted key, e.g. team_coordinator.tau")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("compare", help="all planners on shared seeds")
    common(p)
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        log.debug("failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
