"""
Command-line entry point: run the verification suite and print a report.

    python verify.py --manifold sphere --scaling exp --check curvature_oracle --format json

Exit codes: 0 all cells pass, 1 some cell fails, 2 usage error, 3 some cell
ended in a numerical-domain error.
"""
import argparse
import json
import sys
from typing import List, Optional

from catalog import MANIFOLD_NAMES, SCALING_NAMES
from cgverify_logging import cleanup_old_logs, get_logger, get_session_info, set_console_level
from config import config
from settings_store import settings_manager
from jet_calculus import DiffScheme
from verify_suite import CHECKS, render_json, render_text, run_suite

logger = get_logger(__name__)

EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Numerically verify the geometry of T*M with the rescaled Cheeger-Gromoll metric.",
    )
    parser.add_argument("--manifold", action="append", choices=MANIFOLD_NAMES,
                        help="base manifold (repeatable, default: all)")
    parser.add_argument("--scaling", action="append", choices=SCALING_NAMES,
                        help="scaling function f (repeatable, default: all)")
    parser.add_argument("--check", action="append", choices=sorted(CHECKS),
                        help="check name (repeatable, default: all)")
    parser.add_argument("--samples", type=int, default=config.SAMPLES,
                        help="random sample points per cell")
    parser.add_argument("--seed", type=int, default=config.SEED)
    parser.add_argument("--diff", choices=("jets", "fd"), default=config.DIFF_SCHEME,
                        help="how derivatives of the base fields are obtained")
    parser.add_argument("--step", type=float, default=config.FD_STEP,
                        help="base finite-difference step h")
    parser.add_argument("--richardson", action=argparse.BooleanOptionalAction, default=config.RICHARDSON,
                        help="Richardson extrapolation of finite differences")
    parser.add_argument("--tol-scale", type=float, default=config.TOL_SCALE,
                        help="multiplier applied to every tolerance")
    parser.add_argument("--p-radius", type=float, default=config.P_RADIUS,
                        help="radius of the sampled fibre ball")
    parser.add_argument("--dim", type=int, default=None,
                        help="dimension of the flat and polynomial bases (2..4)")
    parser.add_argument("--format", choices=("text", "json"), default=config.REPORT_FORMAT)
    parser.add_argument("--list-checks", action="store_true", help="list the available checks and exit")
    parser.add_argument("--save-defaults", action="store_true",
                        help="store the sampling, scheme and report options given here as defaults and exit")
    parser.add_argument("--show-defaults", action="store_true", help="print the stored defaults and exit")
    parser.add_argument("--reset-defaults", action="store_true", help="forget every stored default and exit")
    parser.add_argument("--prune-logs", type=int, metavar="DAYS", default=None,
                        help="delete session logs older than DAYS and exit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log DEBUG output to stderr")
    return parser


def list_checks() -> str:
    return "\n".join(f"{spec.name:22} tol={spec.tol:<8g} {spec.description}" for spec in CHECKS.values())


def _usage_error(parser: Optional[argparse.ArgumentParser], message: str) -> int:
    if parser is not None:
        parser.print_usage(sys.stderr)
    print(f"verify: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def save_defaults(args: argparse.Namespace, scheme: DiffScheme) -> bool:
    """Persist the options of this invocation as the stored defaults."""
    stored = [
        settings_manager.save_diff_scheme(scheme.kind),
        settings_manager.save_setting("fd_step", scheme.step),
        settings_manager.save_setting("richardson", scheme.richardson),
        settings_manager.save_samples(args.samples),
        settings_manager.save_seed(args.seed),
        settings_manager.save_tol_scale(args.tol_scale),
        settings_manager.save_setting("p_radius", args.p_radius),
        settings_manager.save_setting("report_format", args.format),
    ]
    return all(stored)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config.validate()
    except ValueError as e:
        return _usage_error(None, f"invalid configuration: {e}")

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0

    if args.verbose:
        set_console_level("DEBUG")
    if args.list_checks:
        print(list_checks())
        return 0
    if args.show_defaults:
        print(json.dumps(settings_manager.get_all_settings(), indent=2, sort_keys=True))
        return 0
    if args.reset_defaults:
        return 0 if settings_manager.clear_all_settings() else EXIT_USAGE
    if args.prune_logs is not None:
        if args.prune_logs < 0:
            return _usage_error(parser, f"--prune-logs must be non-negative, got {args.prune_logs}")
        print(f"removed {cleanup_old_logs(args.prune_logs)} log file(s)")
        return 0

    try:
        scheme = DiffScheme(args.diff, args.step, args.richardson)
        if args.samples < 1:
            raise ValueError(f"--samples must be at least 1, got {args.samples}")
        if args.tol_scale <= 0:
            raise ValueError(f"--tol-scale must be positive, got {args.tol_scale}")
        if args.p_radius <= 0:
            raise ValueError(f"--p-radius must be positive, got {args.p_radius}")
    except ValueError as e:
        return _usage_error(parser, str(e))

    if args.save_defaults:
        if not save_defaults(args, scheme):
            return _usage_error(None, f"could not write {settings_manager.path}")
        print(f"defaults saved to {settings_manager.path}")
        return 0

    logger.info(f"session {get_session_info()['session_id']}: scheme={scheme.label} "
                f"samples={args.samples} seed={args.seed}")
    try:
        result = run_suite(checks=args.check, manifolds=args.manifold, scalings=args.scaling,
                           scheme=scheme, tol_scale=args.tol_scale, samples=args.samples,
                           seed=args.seed, p_radius=args.p_radius, dim=args.dim)
    except ValueError as e:
        print(f"verify: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    print(render_json(result) if args.format == "json" else render_text(result))
    logger.info(f"finished with exit code {result.exit_code}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
