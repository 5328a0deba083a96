"""Command-line entry point: ``elaa-sim``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, build_config, load_config
from .harness import run_monte_carlo


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="elaa-sim",
        description="Monte-Carlo Frobenius-norm and capacity statistics of non-stationary "
                    "ELAA-mMIMO channels.")
    p.add_argument("-c", "--config", help="flat key = value config file")
    p.add_argument("-p", "--preset", choices=["I", "II", "III", "IV", "V"], type=str.upper,
                   help="channel model preset")
    p.add_argument("-n", "--trials", type=int)
    p.add_argument("-s", "--seed", type=int)
    p.add_argument("-M", "--antennas", dest="M", type=int, help="service antennas")
    p.add_argument("-K", "--users", dest="K", type=int)
    p.add_argument("--density", choices=["high", "low"], type=str.lower)
    p.add_argument("--shadowing", dest="shadowing", action="store_true", default=None)
    p.add_argument("--no-shadowing", dest="shadowing", action="store_false")
    p.add_argument("--snr-db", type=float)
    p.add_argument("-o", "--output-dir", help="directory for CSV tables and metadata")
    p.add_argument("-j", "--workers", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in
                 ("preset", "trials", "seed", "M", "K", "density", "shadowing", "snr_db",
                  "output_dir")}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        if args.config:
            config = load_config(args.config, **overrides)
        else:
            config = build_config(overrides)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        result = run_monte_carlo(config, workers=args.workers)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"elaa-sim: error: {exc}", file=sys.stderr)
        return 2

    norm, cap = result.norm_cdf, result.capacity_cdf
    print(f"preset {config.preset}, {config.trials} trials, M={config.M}, "
          f"K={config.K}x{config.n_per_user}, {config.density.value} density")
    print(f"||Hbar||_F  P10={norm.percentile(0.1):.4f}  median={norm.median():.4f}  "
          f"P90={norm.percentile(0.9):.4f}")
    print(f"capacity   P10={cap.percentile(0.1):.4f}  median={cap.median():.4f}  "
          f"P90={cap.percentile(0.9):.4f} bits/s/Hz")
    if config.output_dir:
        print(f"tables written to {config.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
