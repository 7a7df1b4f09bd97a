"""
Command line entry point.

    lorentz-lab verify SUITE|all --config FILE [--seed N] [--out DIR] [--jobs N]
    lorentz-lab geodesic --config FILE --t T --x X.. --dt DT --dx DX.. [--u-max U]
    lorentz-lab diameter --config FILE --T T.. [--epsilon EPS]
    lorentz-lab report DIR

Exit codes: 0 when every executed suite passes, 1 when a suite fails or a
report cannot be written, 2 for usage errors, 3 for configuration and
precondition errors, 4 for numerical anomalies.
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from lorentz_lab.geometry.fibers import FiberPoint
from lorentz_lab.geometry.geodesic_engine import (
    SpacetimePoint,
    TangentVector,
    integrate_geodesic,
)
from lorentz_lab.utils.config import RunConfig
from lorentz_lab.utils.errors import (
    IntegrationFailure,
    LorentzLabError,
    NumericalAnomaly,
    ReportWriteError,
    UsageError,
)
from lorentz_lab.verification.async_lab import AsyncVerificationLab
from lorentz_lab.verification.lab import VerificationLab
from lorentz_lab.verification.report_processor import ReportProcessor
from lorentz_lab.verification.suite_mappings import accepted_suite_names, suite_order

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4


def _add_run_options(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", type=Path, help="output directory (default $LORENTZ_LAB_OUT)")
    parser.add_argument("--jobs", type=int, help="worker threads")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorentz-lab",
        description="Numerical checks of comparison bounds, slab covers and isometry actions on warped spacetimes.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="run a verification suite")
    verify.add_argument("suite", help=f"one of {', '.join(suite_order)}, or 'all'")
    verify.add_argument("--format", choices=["json", "csv"], default="json")
    _add_run_options(verify)

    geodesic = commands.add_parser("geodesic", help="integrate one geodesic and dump its samples")
    geodesic.add_argument("--t", type=float, required=True)
    geodesic.add_argument("--x", type=float, nargs="+", required=True, help="fiber chart coordinates")
    geodesic.add_argument("--chart", type=int, default=0)
    geodesic.add_argument("--dt", type=float, required=True)
    geodesic.add_argument("--dx", type=float, nargs="+", required=True)
    geodesic.add_argument("--u-max", type=float, default=5.0)
    _add_run_options(geodesic)

    diameter = commands.add_parser("diameter", help="diameter curve of the slices F_T")
    diameter.add_argument("--T", type=float, nargs="+", dest="T_values", help="slice levels")
    diameter.add_argument("--epsilon", type=float, help="net fineness")
    _add_run_options(diameter)

    report = commands.add_parser("report", help="summarize the reports below a directory")
    report.add_argument("directory", type=Path)
    report.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def configure_logging(verbosity: int):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    out_dir = str(args.out) if args.out else None
    return config.with_overrides(seed=args.seed, out_dir=out_dir, jobs=args.jobs)


def verify(args: argparse.Namespace) -> int:
    if args.suite != "all" and args.suite not in accepted_suite_names:
        raise UsageError(f"Unknown suite {args.suite!r}; expected one of {', '.join(suite_order)} or 'all'.")
    config = load_config(args)
    out_dir = config.resolved_out_dir()
    if args.suite != "all":
        lab = VerificationLab(config)
        reports = [lab.run_suite(args.suite)]
    elif config.jobs > 1:
        async_lab = AsyncVerificationLab(config)
        asyncio.run(async_lab.run_suites())
        lab = async_lab.lab
        reports = [async_lab.reports[name] for name in suite_order if name in async_lab.reports]
    else:
        lab = VerificationLab(config)
        reports = lab.run_suites()
    for report in reports:
        lab.processor.emit(report, out_dir, args.format)
        print(f"{report.suite:<20} {'PASS' if report.passed else 'FAIL'}  {report.wall_time_ms:10.0f} ms")
    return 0 if all(report.passed for report in reports) else EXIT_FAILED


def geodesic(args: argparse.Namespace) -> int:
    config = load_config(args)
    if len(args.dx) != len(args.x):
        raise UsageError(f"--dx needs {len(args.x)} components, got {len(args.dx)}.")
    lab = VerificationLab(config)
    point = FiberPoint(args.chart, args.x)
    lab.family.fiber.validate(point)
    trajectory = integrate_geodesic(
        lab.family, SpacetimePoint(args.t, point), TangentVector(args.dt, args.dx), args.u_max, settings=lab.settings
    )
    path = config.resolved_out_dir() / "geodesic" / "trajectory.csv"
    lab.processor.write_table(path, "trajectory", trajectory.to_dataframe())
    print(
        f"{trajectory.causal} geodesic, affine length {trajectory.affine_length:.6g}, "
        f"norm drift {trajectory.norm_drift:.3g}, {'valid' if trajectory.valid else 'INVALID'}: {path}"
    )
    return 0


def diameter(args: argparse.Namespace) -> int:
    config = load_config(args)
    async_lab = AsyncVerificationLab(config)
    T_values = args.T_values or config.net.T_values
    epsilon = args.epsilon or config.net.epsilon
    frame = asyncio.run(async_lab.diameter_curve(T_values, epsilon))
    path = config.resolved_out_dir() / "diameter" / "diameter_curve.csv"
    async_lab.lab.processor.write_table(path, "diameter_curve", frame)
    print(frame[["T", "lower", "upper", "nodes"]].to_markdown(index=False))
    return 0


def report(args: argparse.Namespace) -> int:
    frame = ReportProcessor().summarize(args.directory)
    if frame.empty:
        print(f"No reports below {args.directory}")
        return EXIT_FAILED
    print(frame.to_markdown(index=False))
    return 0 if bool(frame["passed"].all()) else EXIT_FAILED


commands = {
    "verify": verify,
    "geodesic": geodesic,
    "diameter": diameter,
    "report": report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    logging.captureWarnings(True)
    try:
        return commands[args.command](args)
    except UsageError as error:
        print(f"lorentz-lab: usage error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except ReportWriteError as error:
        print(f"lorentz-lab: cannot write {error.path}: {error}", file=sys.stderr)
        return EXIT_FAILED
    except (NumericalAnomaly, IntegrationFailure) as error:
        print(f"lorentz-lab: numerical anomaly: {error}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LorentzLabError as error:
        print(f"lorentz-lab: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
