"""Command-line entry point: ``jointirs --config cfg.json --out results/``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, SystemConfig, load_config
from .designs import DesignKind
from .experiment import DEFAULT_GRID, SweepSpec, run_sweep, write_outputs

EXIT_CONFIG = 2
EXIT_IO = 3


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _design_list(text):
    try:
        return tuple(DesignKind(x.strip()) for x in text.split(",") if x.strip())
    except ValueError:
        names = ", ".join(d.value for d in DesignKind)
        raise argparse.ArgumentTypeError(f"designs must be among: {names}") from None


def _seed(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser():
    p = argparse.ArgumentParser(
        prog="jointirs",
        description="Sweep the UL/DL trade-off of IRS-assisted multi-user MISO designs.")
    p.add_argument("--config", help="flat JSON file with system parameters")
    p.add_argument("--design", type=_design_list, default=tuple(DesignKind),
                   help="comma-separated designs (default: all)")
    p.add_argument("--duplex", choices=("tdd", "fdd"))
    p.add_argument("--weighting", choices=("equal", "pf", "independent"))
    p.add_argument("--beamformer", choices=("wmmse", "zf"))
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--alpha-grid", type=_float_list, default=DEFAULT_GRID)
    p.add_argument("--beta-grid", type=_float_list, default=DEFAULT_GRID)
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config) if args.config else SystemConfig()
        overrides = {k: getattr(args, k) for k in ("duplex", "weighting", "beamformer")
                     if getattr(args, k) is not None}
        config = config.replace(**overrides)
        spec = SweepSpec(args.alpha_grid, args.beta_grid, args.realizations, args.seed, args.design)
    except (ConfigError, ValueError) as exc:
        print(f"jointirs: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = run_sweep(spec, config, workers=args.workers)
    try:
        paths = write_outputs(result, config, args.out)
    except OSError as exc:
        print(f"jointirs: error: cannot write outputs to {args.out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
