"""Command line entry point: ``ergobound sweep`` and ``ergobound check``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from .channel_sim import SingularChannelError
from .experiment import ConfigError, load_config, render_svg, run_sweep, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("ergobound")


def _sweep(args) -> int:
    try:
        spec = load_config(args.config)
        base = spec.base
        if args.seed is not None:
            base = replace(base, seed=args.seed)
        if args.samples is not None:
            base = replace(base, samples=args.samples)
        spec = replace(spec, base=base, plot=spec.plot or args.plot)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    name = Path(spec.output_path or "sweep.csv")
    csv_path = Path(args.out) / name.name if args.out else name
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    try:
        result = run_sweep(spec, workers=args.threads)
    except (SingularChannelError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.info("sweep finished in %.1f s", time.perf_counter() - t0)

    try:
        write_csv(result, csv_path)
        print(csv_path)
        if spec.plot:
            svg_path = csv_path.with_suffix(".svg")
            title = f"{base.precoder.value}, {base.csi.value}, M={base.M}, K={base.K}, T={base.T}"
            render_svg(result, svg_path, clamp_lb2=args.clamp_lb2, title=title)
            print(svg_path)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


def _check(args) -> int:
    from .selfcheck import run_checks

    results = run_checks()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergobound",
                                     description="Ergodic rate bounds for multiuser MIMO downlink.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run an SNR sweep from a config file")
    p.add_argument("--config", required=True, help="flat YAML config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--samples", type=int, help="Monte-Carlo draws per grid point")
    p.add_argument("--out", help="output directory for the CSV (and SVG)")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot")
    p.add_argument("--clamp-lb2", action="store_true", help="draw negative LB2 values at 0")
    p.add_argument("--threads", type=int, default=1, help="worker threads (wall time only)")
    p.set_defaults(func=_sweep)

    c = sub.add_parser("check", help="closed forms vs independent oracles")
    c.set_defaults(func=_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
