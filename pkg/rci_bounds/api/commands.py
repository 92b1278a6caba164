"""
CLI verbs. Each takes the parsed arguments, writes CSV to --out or stdout and
returns the process exit code; library errors become their mapped exit codes.
"""
import contextlib
import logging
import sys
from typing import IO, Iterator, Optional

from ..core.errors import ConfigError, RciError
from ..services.analysis_service import analysis_service
from ..services.bounds import Theorem
from ..utils.helpers import format_float, parse_vector, write_csv
from .schemas import AnalysisConfig, load_config

logger = logging.getLogger(__name__)


@contextlib.contextmanager
def _output(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="") as handle:
        yield handle


def _fail(exc: RciError) -> int:
    logger.debug("command failed", exc_info=exc)
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return exc.exit_code


def _load(args) -> AnalysisConfig:
    return load_config(args.config)


def cmd_spectral(args) -> int:
    try:
        rows = analysis_service.support_table(_load(args))
    except RciError as exc:
        return _fail(exc)
    header = ["block", "kind", "eigenvalue", "j", "phi", "hX_plus", "hX_minus",
              "hBU_plus", "hBU_minus", "hW_plus", "hW_minus"]
    with _output(args.out) as out:
        write_csv(out, header, (
            [r.block, r.kind, r.eigenvalue, r.j, " ".join(format_float(float(v)) for v in r.phi),
             r.hX_plus, r.hX_minus, r.hBU_plus, r.hBU_minus, r.hW_plus, r.hW_minus]
            for r in rows
        ))
    return 0


def cmd_bounds(args) -> int:
    try:
        config = _load(args)
        report = analysis_service.bounds(config, args.kmax)
    except RciError as exc:
        return _fail(exc)
    with _output(args.out) as out:
        write_csv(out, ["k", "block", "theorem", "value_plus", "value_minus", "bar"], (
            [r.k, r.block_index + 1, r.theorem.value, r.value_plus, r.value_minus, r.bar] for r in report.rows
        ))
        for seq in report.sequences:
            inf = seq.infimum
            out.write(",".join([
                "# sequence", str(seq.block_index + 1), seq.theorem.value, seq.classification.value,
                format_float(inf.value), inf.justification.value, str(inf.hypothesis_held).lower(),
            ]) + "\n")
        cert = report.certificate
        out.write(",".join([
            "# certificate", format_float(cert.alpha), format_float(cert.k_star), str(cert.block_index + 1),
            cert.theorem.value, cert.direction, cert.justification.value,
        ]) + "\n")
    return 0


def cmd_oracle(args) -> int:
    try:
        config = _load(args)
        rows = analysis_service.oracle(config, args.kmax, args.alpha_tol, args.alpha_hi)
    except RciError as exc:
        return _fail(exc)
    theorems = [Theorem.T1, Theorem.T3, Theorem.T4, Theorem.T6]
    with _output(args.out) as out:
        write_csv(out, ["k", "alpha_star", *(f"bound_{t.value}" for t in theorems), "winner"], (
            [r.k, r.alpha_star, *(r.bounds.get(t) for t in theorems), r.winner.value if r.winner else ""]
            for r in rows
        ))
    return 0


def cmd_attack(args) -> int:
    try:
        config = _load(args)
        settings = config.attack
        alpha = args.alpha if args.alpha is not None else settings.alpha
        if alpha is None:
            raise ConfigError("attack needs a disturbance scaling: pass --alpha or set attack.alpha")
        if args.x0 is not None:
            x0 = parse_vector(args.x0)
        else:
            x0 = settings.x0
        block = args.block if args.block is not None else settings.block
        if block < 1:
            raise ConfigError(f"--block is 1-based, got {block}")
        outcome = analysis_service.attack(
            config, alpha, x0=x0, block=block - 1,
            defender=args.defender or settings.defender,
            max_steps=args.max_steps or settings.max_steps,
            mode=args.mode or settings.mode,
        )
    except RciError as exc:
        return _fail(exc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code

    header, rows = outcome.trace.rows()
    with _output(args.out) as out:
        write_csv(out, header, rows)
    summary = outcome.trace.summary()
    if outcome.certified_k is not None:
        summary += f" (bound certifies emptiness from k={outcome.certified_k})"
    print(summary, file=sys.stderr)
    return 0
