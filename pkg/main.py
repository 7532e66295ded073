import os
import sys
import argparse

from src.commands import FAMILIES, condition_choices, run_command
from src.config import load_config
from src.errors import BellconeError
from src.utils import LOG_LEVEL_ENV, MatrixKind, get_logger, set_log_level

logger = get_logger("main")

MATRIX_KINDS = [k.value for k in MatrixKind]


def _add_input(parser, help_text="Behaviour JSON file, '-' for stdin"):
    parser.add_argument("input", type=str, help=help_text)


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="bellcone",
        description="Trace-norm conditions, Bell-expression bounds and closed forms",
    )
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="Path to the configuration file (default: configs/bellcone.yaml)",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a configuration entry, e.g. --set slice.workers=8",
    )
    parser.add_argument(
        "--tol", type=float, default=None, help="Validation and condition tolerance"
    )
    parser.add_argument("--log-level", type=str, default=None, help="DEBUG, INFO, WARNING, ...")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="Check probability and no-signaling constraints")
    _add_input(p)

    p = sub.add_parser("generate", help="Write a behaviour of a standard family as JSON")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--scenario", type=str, default=None, help="mA,mB,dA,dB")
    p.add_argument("--d", type=int, default=None, help="Outputs of the PR or maximally entangled box")
    p.add_argument("--m", type=int, default=None, help="Inputs of the lifted or random box")
    p.add_argument("--v", type=float, default=None, help="Visibility of the isotropic box")
    p.add_argument("--index", type=int, default=None, help="LDB or PR box index, 0-based")
    p.add_argument("--seed", type=int, default=None, help="Seed of the random family")
    p.add_argument("--terms", type=int, default=4, help="Mixture terms of the random family")
    p.add_argument("-o", "--output", type=str, default=None)

    p = sub.add_parser("matrix", help="Export a behaviour matrix as CSV")
    _add_input(p)
    p.add_argument("--kind", choices=MATRIX_KINDS, default="P")
    p.add_argument("-o", "--output", type=str, default=None)

    p = sub.add_parser("norms", help="Trace, spectral and Frobenius norms of a behaviour matrix")
    _add_input(p)
    p.add_argument("--kind", choices=MATRIX_KINDS, default="P")

    p = sub.add_parser("check", help="Evaluate necessary conditions for quantum behaviours")
    _add_input(p)
    p.add_argument("--condition", action="append", choices=condition_choices(), default=None)
    p.add_argument("--expression", type=str, default=None, help="Catalog key or expression CSV")
    p.add_argument("--correlator", type=str, default=None, help="CSV of correlator weights G_xy")

    p = sub.add_parser("bell-bound", help="Local and quantum bounds of a Bell expression")
    p.add_argument("--expression", type=str, required=True, help="Catalog key or expression CSV")
    p.add_argument("--search", action="store_true", help="Search affine forms for a tighter bound")

    p = sub.add_parser("extremal-bell", help="Bell expression maximally violated by a behaviour")
    _add_input(p)
    p.add_argument("--kind", choices=MATRIX_KINDS, default="P")
    p.add_argument("--name", type=str, default=None)
    p.add_argument("-o", "--output", type=str, default=None, help="Expression CSV (+ .json sidecar)")

    p = sub.add_parser("closed-forms", help="Closed-form spectrum of the maximally entangled box")
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("slice", help="Scan a two-parameter slice against a condition")
    p.add_argument("--p1", type=str, required=True)
    p.add_argument("--p2", type=str, required=True)
    p.add_argument("--base", type=str, default=None, help="Defaults to the fully mixed behaviour")
    p.add_argument("--condition", choices=condition_choices(), default="thm1")
    p.add_argument("--expression", type=str, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--q-range", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    p.add_argument("--p-range", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output", type=str, default=None)
    p.add_argument("--boundary-output", type=str, default=None)

    p = sub.add_parser("certify", help="Dual certificate of a Bell-expression bound")
    p.add_argument(
        "--variant",
        choices=("ineq2", "ineq4", "correlator", "correlator-centered"),
        default="ineq2",
    )
    p.add_argument("--expression", type=str, default=None)
    p.add_argument("--correlator", type=str, default=None)
    p.add_argument("--behaviour", type=str, default=None)

    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        set_log_level(args.log_level or os.environ.get(LOG_LEVEL_ENV) or cfg.logging.level)
        if args.tol is not None:
            cfg.tolerance.validation = args.tol
            cfg.tolerance.condition = args.tol
        return run_command(args, cfg)
    except (BellconeError, ValueError) as e:
        logger.error(str(e))
        return 2


if __name__ == "__main__":
    sys.exit(main())
