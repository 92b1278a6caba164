import argparse
import logging
import sys
from typing import Optional, Sequence

from .api import commands
from .core.logging import configure_logging

VERBS = {
    "spectral": commands.cmd_spectral,
    "bounds": commands.cmd_bounds,
    "oracle": commands.cmd_oracle,
    "attack": commands.cmd_attack,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rci-bounds",
        description="Critical disturbance scalings of constrained linear systems.",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="verb", required=True)

    def verb(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="analysis config (JSON)")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
        return p

    verb("spectral", "Jordan blocks and support values along each eigen-direction")

    p = verb("bounds", "closed-form bounds per horizon and the overall certificate")
    p.add_argument("--kmax", type=int, help="largest horizon (default: config k_max)")

    p = verb("oracle", "exact critical scaling per horizon next to the bounds (n = 2)")
    p.add_argument("--kmax", type=int, help="largest horizon (default: config k_max)")
    p.add_argument("--alpha-tol", type=float, help="bisection width")
    p.add_argument("--alpha-hi", type=float, help="upper bisection bracket; searched when omitted")

    p = verb("attack", "greedy disturbance attack along a real eigen-direction")
    p.add_argument("--alpha", type=float, help="disturbance scaling")
    p.add_argument("--x0", help='initial state, e.g. "0,0"')
    p.add_argument("--block", type=int, help="1-based block index (real eigenvalue)")
    p.add_argument("--defender", choices=["projected-worst-case", "zero", "saturating-feedback"])
    p.add_argument("--max-steps", type=int)
    p.add_argument("--mode", choices=["full", "scalar"])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else None)
    return VERBS[args.verb](args)


if __name__ == "__main__":
    sys.exit(main())
