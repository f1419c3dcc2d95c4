"""Command line entry point: ``hadrf <subcommand> ...``.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
numerical routine fails (quadrature, embedding, degenerate levels).
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import List, Optional

from .cubical import intrinsic_volumes
from .errors import NumericalError
from .fields import apply_transform, simulate
from .hadwiger import SweepSettings, lower_integral, upper_integral
from .harness import ConfigError, load_config, predictions, quantities, resolve_seed, run_validation, write_report
from .io import read_grid_function, read_pgm_mask, write_grid_function

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default, which we reserve for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _cmd_predict(args) -> int:
    cfg = load_config(args.config)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["quantity", "i", "s", "prediction"])
    seen = set()
    for q, p in zip(quantities(cfg), predictions(cfg)):
        key = (q.name, q.i, q.s)
        if key in seen:
            continue
        seen.add(key)
        writer.writerow([q.name, "" if q.i is None else q.i, "" if q.s is None else repr(q.s), repr(p)])
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = resolve_seed(load_config(args.config), args.seed)
    if args.sample < 0:
        raise ConfigError("--sample must be non-negative")
    g = apply_transform(cfg.transform, simulate(cfg.field, args.sample))
    write_grid_function(g, args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = resolve_seed(load_config(args.config), args.seed)
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    out = args.out or cfg.output
    if out is None:
        raise ConfigError("no output path: pass --out or set 'output' in the config")
    rows = run_validation(cfg, args.jobs)
    write_report(rows, out)
    worst = max((abs(r.z) for r in rows), default=0.0)
    print(f"wrote {len(rows)} rows to {out} (max |z| = {worst:.2f})")
    return EXIT_OK


def _cmd_intrinsic(args) -> int:
    cset = read_pgm_mask(args.image, args.spacing)
    for i, v in enumerate(intrinsic_volumes(cset)):
        print(f"mu{i} {v:.12g}")
    return EXIT_OK


def _cmd_integrate(args) -> int:
    f = read_grid_function(args.grid)
    if not 0 <= args.index <= f.grid.ndim:
        raise ConfigError(f"--index must lie in 0..{f.grid.ndim}")
    integral = lower_integral if args.kind == "lower" else upper_integral
    print(repr(integral(f, args.index, SweepSettings(args.step))))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hadrf", description="Intrinsic volumes, Hadwiger integrals and their expectations for random fields.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("predict", help="theoretical expectations for a config")
    sp.add_argument("--config", required=True)
    sp.set_defaults(run=_cmd_predict)

    sp = sub.add_parser("simulate", help="write one transformed field sample")
    sp.add_argument("--config", required=True)
    sp.add_argument("--sample", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, help="overrides HADRF_SEED and the config seed")
    sp.set_defaults(run=_cmd_simulate)

    sp = sub.add_parser("validate", help="Monte Carlo campaign, CSV report")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out")
    sp.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    sp.add_argument("--seed", type=int, help="overrides HADRF_SEED and the config seed")
    sp.set_defaults(run=_cmd_validate)

    sp = sub.add_parser("intrinsic", help="intrinsic volumes of a PGM mask")
    sp.add_argument("--image", required=True)
    sp.add_argument("--spacing", type=float, default=1.0)
    sp.set_defaults(run=_cmd_intrinsic)

    sp = sub.add_parser("integrate", help="Hadwiger integral of a grid function file")
    sp.add_argument("--grid", required=True)
    sp.add_argument("--index", type=int, required=True)
    sp.add_argument("--kind", choices=("lower", "upper"), default="lower")
    sp.add_argument("--step", type=float, help="level step (default: range / 400)")
    sp.set_defaults(run=_cmd_integrate)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args)
    except NumericalError as exc:
        print(f"hadrf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"hadrf: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
