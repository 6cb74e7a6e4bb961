import argparse
import logging
import os
import sys

from dotenv import load_dotenv

EXIT_CONFIG = 2
EXIT_CERTIFICATION = 3
EXIT_IO = 4

# flag name -> argparse options; keys become snake_case config keys
COMMON_FLAGS = {
    "--beta": dict(type=float, help="repulsion strength beta >= 0"),
    "--beta-grid": dict(metavar="B1,B2,...", help="comma-separated beta values (sweep)"),
    "--steps": dict(type=int, help="horizon N"),
    "--replicas": dict(type=int, help="number of independent replicas"),
    "--seed": dict(type=int, help="master seed (64-bit unsigned)"),
    "--n0-counts": dict(metavar="L1,R1,L2,R2", help="initial left/right step counts"),
    "--start": dict(metavar="S1,S2", help="start positions of the two walks"),
    "--record-every": dict(type=int, help="trajectory sampling interval (simulate, flow)"),
    "--out": dict(metavar="DIR", help="output directory (default: outputs/)"),
    "--t-max": dict(type=float, help="flow horizon"),
    "--dt": dict(type=float, help="RK4 step, at most 0.01"),
    "--coupling-b": dict(type=float, help="coupling schedule constant b"),
    "--coupling-m": dict(type=int, help="coupling burn-in step m"),
    "--coupling-z0": dict(type=int, help="coupling walk start Z_0"),
    "--coupling-direction": dict(choices=["lower", "upper", "symmetric"], help="coupling schedule"),
    "--coupling-rho": dict(type=float, help="coupling schedule exponent rho"),
    "--epsilon-center": dict(type=float, help="L1 radius around the center (nonconvergence)"),
    "--threshold-c": dict(type=float, help="excursion threshold c"),
    "--pass-fraction": dict(type=float, help="replica fraction a proxy needs to pass"),
    "--burn-in": dict(type=int, help="steps skipped before tracking scaled extremes"),
    "--workers": dict(type=int, help="worker processes for replica shards"),
    "--log-level": dict(choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level"),
}


def build_parser() -> argparse.ArgumentParser:
    """One subcommand per experiment, all sharing the common flags."""
    from harness import PROTOCOLS

    parser = argparse.ArgumentParser(
        description="Laboratory for two exponentially repelling random walks"
    )
    subparsers = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT", required=True)
    for name, protocol in PROTOCOLS.items():
        sub = subparsers.add_parser(name, help=protocol.description)
        for flag, options in COMMON_FLAGS.items():
            sub.add_argument(flag, default=None, **options)
        sub.add_argument("--config", metavar="PATH", help="JSON config file; flags override it")
        sub.add_argument(
            "--exploratory",
            action="store_true",
            default=None,
            help="allow recurrence runs for beta in (1, 2)",
        )
    return parser


def flag_values(args: argparse.Namespace) -> dict:
    """CLI flags that were actually given, keyed like the config."""
    keys = [flag.lstrip("-").replace("-", "_") for flag in COMMON_FLAGS] + ["exploratory"]
    return {key: getattr(args, key) for key in keys if getattr(args, key) is not None}


def main(argv=None) -> int:
    """Parse, configure, run; returns the process exit code."""
    load_dotenv()

    from experiments.config import ConfigError, build_config, read_config_file
    from harness import run_experiment
    from walks.errors import CertificationError, DomainError

    args = build_parser().parse_args(argv)

    try:
        file_values = read_config_file(args.config) if args.config else {}
        config = build_config(args.experiment, file_values, flag_values(args))
    except (ConfigError, DomainError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"Error: cannot read config {args.config}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO

    logging.basicConfig(
        level=getattr(logging, config.log_level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    print(f"\nExperiment: {config.experiment}")
    print(f"Output directory: {config.out}")
    print("-" * 60)

    try:
        written = run_experiment(config)
    except (ConfigError, DomainError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificationError as exc:
        print(f"Certification failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    print("\n" + "=" * 60)
    print(f"Wrote {len(written)} file(s) to: {os.path.abspath(config.out)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
