"""Command-line entry point: ``python -m bodyschema run --config desk.ini``."""

import argparse
import logging
import sys
import time
from dataclasses import replace

from . import config as config_mod
from . import harness


def _csv_list(text):
    return tuple(p.strip() for p in text.split(",") if p.strip())


def build_parser():
    parser = argparse.ArgumentParser(prog="bodyschema", description="Online DH calibration experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a seeded experiment suite")
    run.add_argument("--config", required=True, help="INI config or a previous manifest.ini")
    run.add_argument("--out", help="output directory (default: output_dir from the config)")
    run.add_argument("--reps", type=int, help="number of repetitions")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--methods", type=_csv_list, help="comma list from r,al,ucsal,ccsal")
    run.add_argument("--noise", type=_csv_list, help="pdn, cn, or pdn,cn")
    run.add_argument("--workers", type=int, help="worker processes")
    run.add_argument("-q", "--quiet", action="store_true")
    return parser


def resolve_config(args):
    with open(args.config, encoding="utf-8") as fh:
        cfg = config_mod.loads_manifest(fh.read())
    updates = {}
    if args.reps is not None:
        updates["repetitions"] = args.reps
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.methods:
        updates["methods"] = args.methods
    if args.noise:
        updates["noise_modes"] = args.noise
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.out:
        updates["output_dir"] = args.out
    return replace(cfg, **updates).validate()


def _print_summary(aggregates, stream):
    rows = harness.summary_rows(aggregates)
    stream.write(f"{'method':10s} {'pos_mm':>8s} {'rot_deg':>8s} {'move_deg':>10s} {'vs_AL':>6s} {'disc':>6s}\n")
    for r in rows:
        stream.write(f"{r[0]:10s} {r[3]:8.2f} {r[5]:8.2f} {r[7]:10.0f} {r[8]:6.2f} {r[9]:6.1f}\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    start = time.time()

    def progress(done, total):
        if not args.quiet:
            print(f"\r{done}/{total} runs", end="", file=sys.stderr, flush=True)

    aggregates, records = harness.run_suite(cfg, progress)
    if not args.quiet:
        print(file=sys.stderr)
    paths = harness.emit_outputs(cfg, aggregates, records, cfg.output_dir)
    if not args.quiet:
        _print_summary(aggregates, sys.stdout)
        print(f"wrote {len(paths)} files to {cfg.output_dir} in {time.time() - start:.0f}s")
    failed = sum(a.failed_runs for a in aggregates.values())
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
