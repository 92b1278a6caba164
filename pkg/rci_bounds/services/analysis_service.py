import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from ..core.errors import NoApplicableBlock, RciError
from .attack import AttackTrace, project, simulate_fullstate, simulate_scalar
from .bounds import BoundReport, Theorem, best_bound, certified_horizon
from .reach_oracle import LinearSystem, critical_alpha_table
from .spectral import BlockKind, SpectralDecomposition, decompose

if TYPE_CHECKING:
    from ..api.schemas import AnalysisConfig

logger = logging.getLogger(__name__)


@dataclass
class SupportRow:
    block: int
    kind: str
    eigenvalue: str
    j: int
    phi: np.ndarray
    hX_plus: float
    hX_minus: float
    hBU_plus: float
    hBU_minus: float
    hW_plus: float
    hW_minus: float


@dataclass
class OracleRow:
    k: int
    alpha_star: float
    bounds: dict[Theorem, float]
    winner: Optional[Theorem]


@dataclass
class AttackOutcome:
    trace: AttackTrace
    certified_k: Optional[int]
    certificate_alpha: Optional[float]


class AnalysisService:
    """Runs the analyses behind the CLI verbs for one validated config."""

    def prepare(self, config: "AnalysisConfig") -> tuple[LinearSystem, SpectralDecomposition]:
        system = config.build_system()
        system.check_assumptions()
        spectral = decompose(system.A, config.declared_structure())
        for i, block in enumerate(spectral.blocks, start=1):
            logger.info("block %d: %s", i, block.describe())
        return system, spectral

    def support_table(self, config: "AnalysisConfig") -> list[SupportRow]:
        system, spectral = self.prepare(config)
        rows = []
        for i, block in enumerate(spectral.blocks, start=1):
            if block.kind is BlockKind.COMPLEX_PAIR:
                eig = f"{block.rho:.17g}*exp(+-i*{block.theta:.17g})"
            else:
                eig = f"{block.lam:.17g}"
            for j, phi in enumerate(block.phi, start=1):
                rows.append(SupportRow(
                    block=i, kind=block.kind.value, eigenvalue=eig, j=j, phi=phi,
                    hX_plus=system.X.support(phi), hX_minus=system.X.support(-phi),
                    hBU_plus=system.neg_BU.support(phi), hBU_minus=system.neg_BU.support(-phi),
                    hW_plus=system.Wbar.support(phi), hW_minus=system.Wbar.support(-phi),
                ))
        return rows

    def bounds(self, config: "AnalysisConfig", k_max: Optional[int] = None) -> BoundReport:
        system, spectral = self.prepare(config)
        return best_bound(system, spectral, k_max or config.k_max)

    def oracle(self, config: "AnalysisConfig", k_max: Optional[int] = None, alpha_tol: Optional[float] = None,
               alpha_hi: Optional[float] = None) -> list[OracleRow]:
        system, spectral = self.prepare(config)
        k_max = k_max or config.k_max
        try:
            report: Optional[BoundReport] = best_bound(system, spectral, k_max)
        except NoApplicableBlock as exc:
            logger.warning("no closed-form bound columns: %s", exc)
            report = None
        ks = list(range(1, k_max + 1))
        alphas = critical_alpha_table(system, ks, alpha_tol or config.alpha_tol,
                                      alpha_hi if alpha_hi is not None else config.alpha_hi)
        rows = []
        for k, alpha_star in zip(ks, alphas):
            per_theorem = report.by_theorem(k) if report else {}
            winner = min(per_theorem, key=per_theorem.get) if per_theorem else None
            rows.append(OracleRow(k, alpha_star, per_theorem, winner))
        return rows

    def attack(self, config: "AnalysisConfig", alpha: float, x0: Optional[np.ndarray] = None, block: int = 0,
               defender: str = "projected-worst-case", max_steps: Optional[int] = None,
               mode: str = "full") -> AttackOutcome:
        system, spectral = self.prepare(config)
        x0 = np.zeros(system.n) if x0 is None else np.asarray(x0, dtype=float)
        if mode == "scalar":
            p = project(system, spectral, block, alpha)
            trace = simulate_scalar(p, float(p.phi @ x0), max_steps)
        else:
            trace = simulate_fullstate(system, spectral, block, alpha, x0, max_steps, defender,
                                       gain=config.attack.gain)

        certified_k, cert_alpha = None, None
        try:
            report = best_bound(system, spectral, config.k_max)
        except RciError as exc:
            logger.warning("no bound certificate for the attack summary: %s", exc)
        else:
            cert_alpha = report.certificate.alpha
            for seq in report.sequences:
                if seq.block_index == block and seq.theorem in (Theorem.T1, Theorem.T4):
                    certified_k = certified_horizon(seq, alpha)
        return AttackOutcome(trace, certified_k, cert_alpha)


analysis_service = AnalysisService()
