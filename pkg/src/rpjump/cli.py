"""Command line interface.

    rpjump run <config> [--output-dir DIR] [--seed N] [--workers N] [--quiet]
    rpjump compare <config> --theories haberkorn,jones_hore [...]
    rpjump selftest

Exit codes: 0 success, 1 invalid input or I/O failure, 2 numerical abort.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, selftest
from .config import ConfigError, parse_config
from .master import NumericalAbort
from .scenario import compare, run_scenario

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rpjump", description="Radical-pair master equations and quantum-jump unravelings.")
    p.add_argument("--version", action="version", version=f"rpjump {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", type=Path)
        sp.add_argument("--output-dir", type=Path, default=Path("."))
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--quiet", action="store_true")

    run = sub.add_parser("run", help="run one scenario")
    common(run)
    run.add_argument("--workers", type=int, default=1, help="threads for trajectory ensembles")

    cmp_ = sub.add_parser("compare", help="run one scenario under several master equations")
    common(cmp_)
    cmp_.add_argument("--theories", required=True, help="comma-separated theory names")

    sub.add_parser("selftest", help="run the quick invariant checks")
    return p


def _load(path: Path, seed):
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    config = parse_config(text)
    return config if seed is None else config.with_seed(seed)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selftest":
        return EXIT_OK if selftest.run() else EXIT_INVALID

    say = (lambda *a: None) if args.quiet else print
    try:
        config = _load(args.config, args.seed)
        if args.command == "run":
            out = run_scenario(config, args.output_dir, workers=args.workers)
        else:
            out = compare(config, [t.strip() for t in args.theories.split(",") if t.strip()], args.output_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID

    say(f"wrote {out.csv_path}")
    say(f"wrote {out.summary_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
