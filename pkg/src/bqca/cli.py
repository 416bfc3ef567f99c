"""Command line entry point: ``bqca-run config.yaml --out results``."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import experiment


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bqca-run", description="Run BQCA experiments from config files.")
    p.add_argument("configs", nargs="*", type=Path, help="experiment config files (YAML or JSON)")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
    p.add_argument("--emit-schedule", action="store_true", help="also write the compiled pulse schedule")
    p.add_argument("--jobs", type=int, default=1, help="run up to this many configs in parallel")
    p.add_argument("--seed-figures", action="store_true",
                   help="write the bundled figure configs into --out and exit")
    return p


def _run_one(path: Path, out: Path, emit_schedule: bool) -> dict:
    try:
        files = experiment.run(path, out, emit_schedule)
    except experiment.ConfigError as exc:
        return {"config": str(path), "ok": False, **exc.to_dict()}
    except (OSError, ValueError) as exc:
        return {"config": str(path), "ok": False, "error": "runtime", "message": str(exc)}
    return {"config": str(path), "ok": True, "files": [str(f) for f in files]}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed_figures:
        for p in experiment.seed_figures(args.out):
            print(p)
        return 0
    if not args.configs:
        print(json.dumps({"error": "usage", "message": "no config given"}), file=sys.stderr)
        return 2
    if args.jobs < 1:
        print(json.dumps({"error": "usage", "message": "--jobs must be >= 1"}), file=sys.stderr)
        return 2
    if args.jobs == 1 or len(args.configs) == 1:
        results = [_run_one(c, args.out, args.emit_schedule) for c in args.configs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, args.configs, [args.out] * len(args.configs),
                                    [args.emit_schedule] * len(args.configs)))
    status = 0
    for r in results:
        if r["ok"]:
            print(f"{r['config']}: wrote {len(r['files'])} files")
        else:
            print(json.dumps(r), file=sys.stderr)
            status = 2 if r["error"] == "config" else 1
    return status


if __name__ == "__main__":
    sys.exit(main())
