"""
Closed-form disturbance scalings above which no admissible policy keeps the
state inside X.

Every bound is a ratio of support values of X, -BU and W̄ taken along
spectral directions of A^T. Each direction is evaluated together with its
reflection and the larger of the two values is kept. A value at horizon k
certifies that any larger scaling empties the k-step admissible set.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from ..core.config import ORACLE_WORKERS, SELF_CHECK_RTOL, TIE_TOL, UNIT_BRANCH_TOL
from ..core.errors import (
    AsymmetricW,
    BoundError,
    DegenerateDirection,
    FormulaMismatch,
    IrrationalAngle,
    NoApplicableBlock,
    NonNegativeEigenvalue,
    NonPositiveDenominator,
    NonPositiveEigenvalue,
    WrongBlockKind,
    ZeroEigenvalueUnsupported,
)
from .convex_sets import SupportEvaluable, is_symmetric
from .spectral import BlockKind, JordanBlock, SpectralDecomposition, rotating_direction

if TYPE_CHECKING:
    from .reach_oracle import LinearSystem

logger = logging.getLogger(__name__)


class Theorem(str, Enum):
    T1 = "T1"
    T3 = "T3"
    T4 = "T4"
    T6 = "T6"


class Trend(str, Enum):
    DECREASING = "Decreasing"
    INCREASING = "Increasing"
    CONSTANT = "Constant"
    NON_MONOTONE = "NonMonotone"
    UNKNOWN = "Unknown"


class Justification(str, Enum):
    LIMIT_FORMULA = "LimitFormula"
    K1_VALUE = "K1Value"
    MIN_OVER_COMPUTED = "MinOverComputed"


@dataclass(frozen=True)
class SupportTriple:
    """Supports of X, -BU and W̄ along +z and -z."""

    hX_plus: float
    hX_minus: float
    hBU_plus: float
    hBU_minus: float
    hW_plus: float
    hW_minus: float

    def __post_init__(self):
        if min(self.hX_plus, self.hX_minus) <= 0.0:
            raise DegenerateDirection(f"X support must be positive along the direction pair, got "
                                      f"{self.hX_plus}, {self.hX_minus}")
        if min(self.hW_plus, self.hW_minus) <= 0.0:
            raise DegenerateDirection(f"disturbance support vanishes along the direction pair: "
                                      f"{self.hW_plus}, {self.hW_minus}")
        if min(self.hBU_plus, self.hBU_minus) < -TIE_TOL:
            raise ValueError(f"-BU must contain the origin, got supports {self.hBU_plus}, {self.hBU_minus}")

    @classmethod
    def from_sets(cls, X: SupportEvaluable, neg_BU: SupportEvaluable, Wbar: SupportEvaluable, z) -> "SupportTriple":
        z = np.asarray(z, dtype=float)
        return cls(
            hX_plus=X.support(z), hX_minus=X.support(-z),
            hBU_plus=max(neg_BU.support(z), 0.0), hBU_minus=max(neg_BU.support(-z), 0.0),
            hW_plus=Wbar.support(z), hW_minus=Wbar.support(-z),
        )

    def side(self, sign: int) -> tuple[float, float, float, float, float]:
        """(hX, hBU, hW) along sign*z followed by (hBU, hW) along the reversed direction."""
        if sign > 0:
            return self.hX_plus, self.hBU_plus, self.hW_plus, self.hBU_minus, self.hW_minus
        return self.hX_minus, self.hBU_minus, self.hW_minus, self.hBU_plus, self.hW_plus


@dataclass(frozen=True)
class GeneralizedSupports:
    """Supports along the first two chain vectors of a Jordan block, W̄ symmetric."""

    hX2_plus: float
    hX2_minus: float
    hBU2_plus: float
    hBU2_minus: float
    hBU1_plus: float
    hBU1_minus: float
    hW2: float
    hW1: float

    @classmethod
    def from_sets(cls, X: SupportEvaluable, neg_BU: SupportEvaluable, Wbar: SupportEvaluable,
                  phi1, phi2) -> "GeneralizedSupports":
        if not is_symmetric(Wbar):
            raise AsymmetricW("chain-vector bounds require a disturbance set symmetric about the origin")
        phi1, phi2 = np.asarray(phi1, dtype=float), np.asarray(phi2, dtype=float)
        out = cls(
            hX2_plus=X.support(phi2), hX2_minus=X.support(-phi2),
            hBU2_plus=max(neg_BU.support(phi2), 0.0), hBU2_minus=max(neg_BU.support(-phi2), 0.0),
            hBU1_plus=max(neg_BU.support(phi1), 0.0), hBU1_minus=max(neg_BU.support(-phi1), 0.0),
            hW2=Wbar.support(phi2), hW1=Wbar.support(phi1),
        )
        if out.hW1 <= 0.0 or out.hW2 <= 0.0:
            raise DegenerateDirection(f"disturbance support vanishes along a chain vector: {out.hW1}, {out.hW2}")
        return out


@dataclass(frozen=True)
class BoundValue:
    value_plus: float
    value_minus: float

    @property
    def bar(self) -> float:
        return max(self.value_plus, self.value_minus)


@dataclass(frozen=True)
class ComplexBound(BoundValue):
    j: int = 1
    l0: int = 0


@dataclass(frozen=True)
class Infimum:
    value: float
    justification: Justification
    hypothesis_held: bool = True
    k: int | None = None
    detail: str = ""


@dataclass
class BoundSequence:
    theorem: Theorem
    block_index: int
    per_k: list[tuple[int, float]]
    classification: Trend
    infimum: Infimum | None = None
    values: list[BoundValue] = field(default_factory=list, repr=False)
    direction: str = ""


@dataclass(frozen=True)
class AlphaCertificate:
    alpha: float
    k_star: float
    block_index: int
    theorem: Theorem
    direction: str
    justification: Justification


@dataclass(frozen=True)
class BoundRow:
    k: int
    block_index: int
    theorem: Theorem
    value_plus: float
    value_minus: float
    bar: float


@dataclass
class BoundReport:
    rows: list[BoundRow]
    sequences: list[BoundSequence]
    certificate: AlphaCertificate

    def per_k_min(self) -> list[tuple[int, float, Theorem]]:
        best: dict[int, tuple[float, Theorem]] = {}
        for row in self.rows:
            if row.k not in best or row.bar < best[row.k][0]:
                best[row.k] = (row.bar, row.theorem)
        return [(k, v, t) for k, (v, t) in sorted(best.items())]

    def by_theorem(self, k: int) -> dict[Theorem, float]:
        out: dict[Theorem, float] = {}
        for row in self.rows:
            if row.k == k:
                out[row.theorem] = min(out.get(row.theorem, math.inf), row.bar)
        return out


# ---------------------------------------------------------------------------
# geometric series


def geom_sum(a: int, b: int, x: float) -> float:
    """sum_{i=a}^{b} x^i; zero for an empty range."""
    if b < a:
        return 0.0
    if abs(x - 1.0) < UNIT_BRANCH_TOL:
        return float(b - a + 1)
    return (x**a - x ** (b + 1)) / (1.0 - x)


def geom_sum_deriv(a: int, b: int, x: float) -> float:
    """sum_{i=a}^{b} i x^(i-1); zero for an empty range."""
    if b < a:
        return 0.0
    if abs(x - 1.0) < UNIT_BRANCH_TOL:
        return (b - a + 1) * (a + b) / 2.0
    lead = a * x ** (a - 1) if a > 0 else 0.0
    return (lead + (1 - a) * x**a + b * x ** (b + 1) - (b + 1) * x**b) / (1.0 - x) ** 2


def _scaled_geom_sum(a: int, b: int, x: float, p: int) -> float:
    """geom_sum(a, b, x) * x^(-p), kept finite for large exponents when x > 1."""
    if b < a:
        return 0.0
    if x > 1.0 + UNIT_BRANCH_TOL:
        return x ** (b - p) * geom_sum(0, b - a, 1.0 / x)
    return geom_sum(a, b, x) * x ** (-p) if p else geom_sum(a, b, x)


def _plus_formula(lam: float, k: int, hX: float, hBU: float, hW: float) -> float:
    p = k - 1 if lam > 1.0 else 0
    head = lam ** (-p) if p else 1.0
    num = hX * head + _scaled_geom_sum(0, k - 2, lam, p) * hBU
    den = _scaled_geom_sum(0, k - 1, lam, p) * hW
    return num / den


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"horizon k must be >= 1, got {k}")


def _compare(lhs: float, rhs: float) -> Trend:
    if abs(lhs - rhs) <= TIE_TOL:
        return Trend.CONSTANT
    return Trend.DECREASING if lhs > rhs else Trend.INCREASING


def trend_of(values: Sequence[float]) -> Trend:
    if len(values) < 2:
        return Trend.UNKNOWN
    diffs = np.diff(np.asarray(values, dtype=float))
    scale = max(1.0, float(np.max(np.abs(values))))
    flat = np.abs(diffs) <= 1e-15 * scale
    if np.all(flat):
        return Trend.CONSTANT
    if np.all(diffs < 0):
        return Trend.DECREASING
    if np.all(diffs > 0):
        return Trend.INCREASING
    return Trend.NON_MONOTONE


# ---------------------------------------------------------------------------
# positive real eigenvalue


def alpha_plus_k(lam: float, t: SupportTriple, k: int) -> BoundValue:
    if lam <= 0.0:
        raise NonPositiveEigenvalue(f"eigenvalue must be positive, got {lam}")
    _check_k(k)
    return BoundValue(
        value_plus=_plus_formula(lam, k, t.hX_plus, t.hBU_plus, t.hW_plus),
        value_minus=_plus_formula(lam, k, t.hX_minus, t.hBU_minus, t.hW_minus),
    )


def alpha_plus_classify(lam: float, t: SupportTriple) -> tuple[Trend, Trend]:
    return _compare(lam * t.hX_plus, t.hBU_plus), _compare(lam * t.hX_minus, t.hBU_minus)


def _plus_limit(lam: float, hX: float, hBU: float, hW: float) -> float:
    if lam >= 1.0:
        return hBU / (lam * hW)
    return (1.0 - lam) * hX / hW + hBU / hW


def alpha_plus_inf(lam: float, t: SupportTriple) -> Infimum:
    if lam <= 0.0:
        raise NonPositiveEigenvalue(f"eigenvalue must be positive, got {lam}")
    if alpha_plus_classify(lam, t) != (Trend.DECREASING, Trend.DECREASING):
        fallback = alpha_plus_k(lam, t, 1).bar
        logger.warning("lambda*hX > h(-BU) fails for lambda=%.6g; using the k=1 value %.6g", lam, fallback)
        return Infimum(fallback, Justification.K1_VALUE, hypothesis_held=False, k=1)
    value = max(
        _plus_limit(lam, t.hX_plus, t.hBU_plus, t.hW_plus),
        _plus_limit(lam, t.hX_minus, t.hBU_minus, t.hW_minus),
    )
    return Infimum(value, Justification.LIMIT_FORMULA)


def alpha_plus_direction_inf(lam: float, t: SupportTriple) -> tuple[float, float]:
    """Per-direction infimum over k: limit when the sequence decreases, k=1 value otherwise."""
    out = []
    for sign, trend in zip((1, -1), alpha_plus_classify(lam, t)):
        hX, hBU, hW, _, _ = t.side(sign)
        out.append(_plus_limit(lam, hX, hBU, hW) if trend is Trend.DECREASING else hX / hW)
    return out[0], out[1]


def support_sum_lower_bound(values: Sequence[tuple[float, float]]) -> float:
    """max_i ( h_Y(z_i) - sum_{j != i} h_{-Y}(z_j) ), a lower bound on h_Y(sum z_i)."""
    if not values:
        raise ValueError("support_sum_lower_bound needs at least one direction")
    neg_total = sum(neg for _, neg in values)
    return max(h - (neg_total - neg) for h, neg in values)


# ---------------------------------------------------------------------------
# generalized eigenvector of a positive eigenvalue


def f_crossover(lam: float, hW_phi2: float, hW_phi1: float) -> tuple[float, Callable[[float], float]]:
    if lam <= 0.0:
        raise NonPositiveEigenvalue(f"eigenvalue must be positive, got {lam}")
    if hW_phi2 <= 0.0 or hW_phi1 <= 0.0:
        raise DegenerateDirection(f"crossover needs positive supports, got {hW_phi2}, {hW_phi1}")

    def f(ell: float) -> float:
        drift = ell * lam ** (ell - 1) * hW_phi1 if ell != 0 else 0.0
        return lam**ell * hW_phi2 - drift

    return lam * hW_phi2 / hW_phi1, f


def _beta_denominator(lam: float, s: GeneralizedSupports, k: int, last_positive: int) -> float:
    def part(b: int) -> float:
        return geom_sum(0, b, lam) * s.hW2 - geom_sum_deriv(0, b, lam) * s.hW1

    if k <= last_positive + 1:
        return part(k - 1)
    return 2.0 * part(last_positive) - part(k - 1)


def beta_plus_k(lam: float, s: GeneralizedSupports, k: int) -> BoundValue:
    if lam <= 0.0:
        raise NonPositiveEigenvalue(f"eigenvalue must be positive, got {lam}")
    _check_k(k)
    l_star, f = f_crossover(lam, s.hW2, s.hW1)
    nearest = round(l_star)
    last_positive = nearest if abs(l_star - nearest) <= UNIT_BRANCH_TOL else math.floor(l_star)

    s0, d0 = geom_sum(0, k - 2, lam), geom_sum_deriv(0, k - 2, lam)
    num_plus = s.hX2_plus + s0 * s.hBU2_plus + d0 * s.hBU1_plus
    num_minus = s.hX2_minus + s0 * s.hBU2_minus + d0 * s.hBU1_minus
    den = _beta_denominator(lam, s, k, last_positive)

    # series self-check of the piecewise closed form
    powers = [lam**ell for ell in range(k - 1)]
    slopes = [ell * lam ** (ell - 1) if ell else 0.0 for ell in range(k - 1)]
    direct_plus = s.hX2_plus + sum(p * s.hBU2_plus + q * s.hBU1_plus for p, q in zip(powers, slopes))
    direct_minus = s.hX2_minus + sum(p * s.hBU2_minus + q * s.hBU1_minus for p, q in zip(powers, slopes))
    direct_den = sum(abs(f(ell)) for ell in range(k))
    for closed, direct, what in ((num_plus, direct_plus, "numerator(+)"), (num_minus, direct_minus, "numerator(-)"),
                                 (den, direct_den, "denominator")):
        if not math.isclose(closed, direct, rel_tol=SELF_CHECK_RTOL, abs_tol=1e-12):
            raise FormulaMismatch(f"{what} closed form {closed!r} disagrees with series {direct!r} at k={k}")
    if den <= 0.0:
        raise NonPositiveDenominator(f"denominator {den} at k={k}, lambda={lam}")
    return BoundValue(num_plus / den, num_minus / den)


# ---------------------------------------------------------------------------
# negative real eigenvalue


def _minus_parts(m: float, k: int) -> tuple[float, float, float, float, float]:
    """Odd/even weighted sums of |lambda|^l, all divided by the same power to stay finite."""
    x = m * m
    p = (k - 1) // 2 if x > 1.0 else 0
    head = x ** (-p) if p else 1.0
    odd_num = m * _scaled_geom_sum(0, (k - 1) // 2 - 1, x, p)
    even_num = _scaled_geom_sum(0, k // 2 - 1, x, p)
    odd_den = m * _scaled_geom_sum(0, k // 2 - 1, x, p)
    even_den = _scaled_geom_sum(0, (k + 1) // 2 - 1, x, p)
    return head, odd_num, even_num, odd_den, even_den


def alpha_minus_k(lam: float, t: SupportTriple, k: int) -> BoundValue:
    if lam >= 0.0:
        raise NonNegativeEigenvalue(f"eigenvalue must be negative, got {lam}")
    _check_k(k)
    head, odd_num, even_num, odd_den, even_den = _minus_parts(abs(lam), k)
    values = []
    for sign in (1, -1):
        hX, hBU, hW, hBU_rev, hW_rev = t.side(sign)
        num = hX * head + odd_num * hBU_rev + even_num * hBU
        den = odd_den * hW_rev + even_den * hW
        values.append(num / den)
    return BoundValue(values[0], values[1])


def alpha_minus_classify(lam: float, t: SupportTriple) -> tuple[tuple[Trend, Trend], tuple[Trend, Trend]]:
    """((odd, even) along +z, (odd, even) along -z)."""
    if lam >= 0.0:
        raise NonNegativeEigenvalue(f"eigenvalue must be negative, got {lam}")
    m = abs(lam)
    out = []
    for sign in (1, -1):
        hX, hBU, hW, hBU_rev, hW_rev = t.side(sign)
        odd_rhs = (m * hBU_rev + hBU) * hW / (m * hW_rev + m * m * hW)
        even_rhs = (m * hW_rev + hW) * hBU_rev / (m * m * hW_rev + m * hW)
        out.append((_compare(hX, odd_rhs), _compare(hX, even_rhs)))
    return out[0], out[1]


def _minus_limits(m: float, hX: float, hBU: float, hW: float, hBU_rev: float, hW_rev: float) -> tuple[float, float]:
    if m < 1.0:
        common = ((1.0 - m * m) * hX + m * hBU_rev + hBU) / (m * hW_rev + hW)
        return common, common
    odd = (m * hBU_rev + hBU) / (m * hW_rev + m * m * hW)
    even = (hBU_rev + m * hBU) / (m * m * hW_rev + m * hW)
    return odd, even


def alpha_minus_inf(lam: float, t: SupportTriple, per_k: Sequence[tuple[int, float]] | None = None,
                    k_max: int = 200) -> Infimum:
    if lam >= 0.0:
        raise NonNegativeEigenvalue(f"eigenvalue must be negative, got {lam}")
    trends = alpha_minus_classify(lam, t)
    if any(tr is not Trend.DECREASING for pair in trends for tr in pair):
        if per_k is None:
            per_k = [(k, alpha_minus_k(lam, t, k).bar) for k in range(1, k_max + 1)]
        k_best, value = min(per_k, key=lambda kv: (kv[1], kv[0]))
        logger.warning("parity monotonicity fails for lambda=%.6g; using the computed minimum %.6g at k=%d",
                       lam, value, k_best)
        return Infimum(value, Justification.MIN_OVER_COMPUTED, hypothesis_held=False, k=k_best)
    m = abs(lam)
    plus = _minus_limits(m, *t.side(1))
    minus = _minus_limits(m, *t.side(-1))
    odd_bar, even_bar = max(plus[0], minus[0]), max(plus[1], minus[1])
    parity = "odd" if odd_bar <= even_bar else "even"
    return Infimum(min(odd_bar, even_bar), Justification.LIMIT_FORMULA, detail=parity)


# ---------------------------------------------------------------------------
# complex pair


def _require_rotation(block: JordanBlock) -> None:
    if block.kind is not BlockKind.COMPLEX_PAIR:
        raise WrongBlockKind(f"expected a complex pair, got {block.kind.value}")
    if block.period is None:
        raise IrrationalAngle(f"rotation angle {block.theta} is not a rational multiple of pi")
    if not block.rho or block.rho <= 0.0:
        raise BoundError(f"complex pair with modulus {block.rho} is degenerate")


def _support_pair(s: SupportEvaluable, z: np.ndarray) -> tuple[float, float]:
    return s.support(z), s.support(-z)


def alpha_c_k(block: JordanBlock, sets: tuple[SupportEvaluable, SupportEvaluable, SupportEvaluable],
              k: int) -> ComplexBound:
    _require_rotation(block)
    _check_k(k)
    X, neg_BU, Wbar = sets
    best: ComplexBound | None = None
    for j in (1, 2):
        for l0 in range(block.period):
            base = rotating_direction(block, j, l0)
            ahead = rotating_direction(block, j, l0 + k)
            hX = _support_pair(X, ahead)
            hBU = tuple(max(v, 0.0) for v in _support_pair(neg_BU, base))
            hW = _support_pair(Wbar, base)
            if min(hW) <= 0.0:
                raise DegenerateDirection(f"disturbance support vanishes along psi(j={j}, l0={l0})")
            cand = ComplexBound(
                value_plus=_plus_formula(block.rho, k, hX[0], hBU[0], hW[0]),
                value_minus=_plus_formula(block.rho, k, hX[1], hBU[1], hW[1]),
                j=j, l0=l0,
            )
            if best is None or cand.bar < best.bar:
                best = cand
    return best


def alpha_c_inf(block: JordanBlock, sets: tuple[SupportEvaluable, SupportEvaluable, SupportEvaluable]) -> Infimum:
    _require_rotation(block)
    X, neg_BU, Wbar = sets
    rho, M = block.rho, block.period
    table = {}
    for j in (1, 2):
        for ell in range(M):
            psi = rotating_direction(block, j, ell)
            hBU = tuple(max(v, 0.0) for v in _support_pair(neg_BU, psi))
            table[j, ell] = (_support_pair(X, psi), hBU, _support_pair(Wbar, psi))

    held = True
    for j in (1, 2):
        for side in (0, 1):
            worst_x = min(rho * table[j, ell][0][side] for ell in range(M))
            worst_bu = max(table[j, ell][1][side] for ell in range(M))
            held = held and worst_x > worst_bu
    if not held:
        per_k = [(k, alpha_c_k(block, sets, k).bar) for k in range(1, 10 * M + 1)]
        k_best, value = min(per_k, key=lambda kv: (kv[1], kv[0]))
        logger.warning("rotating-direction hypothesis fails for rho=%.6g; using the computed minimum %.6g at k=%d",
                       rho, value, k_best)
        return Infimum(value, Justification.MIN_OVER_COMPUTED, hypothesis_held=False, k=k_best)

    best, detail = math.inf, ""
    for j in (1, 2):
        for l0 in range(M):
            _, hBU, hW = table[j, l0]
            if min(hW) <= 0.0:
                raise DegenerateDirection(f"disturbance support vanishes along psi(j={j}, l0={l0})")
            tails = range(M) if rho < 1.0 else (l0,)
            for ell in tails:
                hX = table[j, ell][0]
                value = max(
                    (hBU[s] / (rho * hW[s])) if rho >= 1.0 else ((1.0 - rho) * hX[s] / hW[s] + hBU[s] / hW[s])
                    for s in (0, 1)
                )
                if value < best:
                    best, detail = value, f"psi[j={j},l0={l0}]"
    return Infimum(best, Justification.LIMIT_FORMULA, detail=detail)


# ---------------------------------------------------------------------------
# aggregation


def certified_horizon(sequence: BoundSequence, alpha: float) -> int | None:
    """Smallest k whose bound lies strictly below alpha."""
    for k, value in sequence.per_k:
        if value < alpha:
            return k
    return None


def _real_sequence(theorem: Theorem, index: int, block: JordanBlock, system: "LinearSystem",
                   k_max: int) -> BoundSequence:
    X, neg_BU, Wbar = system.X, system.neg_BU, system.Wbar
    lam = block.lam
    ks = range(1, k_max + 1)
    if theorem is Theorem.T1:
        t = SupportTriple.from_sets(X, neg_BU, Wbar, block.phi[0])
        values = [alpha_plus_k(lam, t, k) for k in ks]
        trends = alpha_plus_classify(lam, t)
        bars = [v.bar for v in values]
        classification = trends[0] if trends[0] is trends[1] else trend_of(bars)
        if classification is Trend.DECREASING and trend_of(bars) is not Trend.DECREASING and k_max > 1:
            classification = trend_of(bars)
        return BoundSequence(theorem, index, list(zip(ks, bars)), classification,
                             alpha_plus_inf(lam, t), values, "phi[1]")
    if theorem is Theorem.T3:
        s = GeneralizedSupports.from_sets(X, neg_BU, Wbar, block.phi[0], block.phi[1])
        values = [beta_plus_k(lam, s, k) for k in ks]
        per_k = [(k, v.bar) for k, v in zip(ks, values)]
        k_best, low = min(per_k, key=lambda kv: (kv[1], kv[0]))
        return BoundSequence(theorem, index, per_k, trend_of([v for _, v in per_k]),
                             Infimum(low, Justification.MIN_OVER_COMPUTED, k=k_best), values, "phi[2]")
    t = SupportTriple.from_sets(X, neg_BU, Wbar, block.phi[0])
    values = [alpha_minus_k(lam, t, k) for k in ks]
    per_k = [(k, v.bar) for k, v in zip(ks, values)]
    return BoundSequence(theorem, index, per_k, trend_of([v for _, v in per_k]),
                         alpha_minus_inf(lam, t, per_k), values, "phi[1]")


def _complex_sequence(index: int, block: JordanBlock, system: "LinearSystem", k_max: int) -> BoundSequence:
    sets = (system.X, system.neg_BU, system.Wbar)
    values = [alpha_c_k(block, sets, k) for k in range(1, k_max + 1)]
    per_k = [(k, v.bar) for k, v in enumerate(values, start=1)]
    return BoundSequence(Theorem.T6, index, per_k, trend_of([v for _, v in per_k]),
                         alpha_c_inf(block, sets), values, "psi")


def applicable_jobs(system: "LinearSystem", spectral: SpectralDecomposition) -> list[tuple[Theorem, int, JordanBlock]]:
    jobs = []
    symmetric_w = None
    for index, block in enumerate(spectral.blocks):
        if block.kind is BlockKind.REAL_POSITIVE:
            jobs.append((Theorem.T1, index, block))
            if block.size >= 2:
                if symmetric_w is None:
                    symmetric_w = is_symmetric(system.Wbar)
                if symmetric_w:
                    jobs.append((Theorem.T3, index, block))
                else:
                    logger.warning("block %d: disturbance set is not symmetric, chain-vector bound skipped", index)
        elif block.kind is BlockKind.REAL_NEGATIVE:
            jobs.append((Theorem.T4, index, block))
        elif block.kind is BlockKind.COMPLEX_PAIR:
            if block.period is None:
                logger.warning("block %d: %s", index, IrrationalAngle("irrational rotation angle, no bound"))
            else:
                jobs.append((Theorem.T6, index, block))
        else:
            logger.warning("block %d: %s", index, ZeroEigenvalueUnsupported("zero eigenvalue, no bound"))
    return jobs


def _run_job(job: tuple[Theorem, int, JordanBlock], system: "LinearSystem", k_max: int) -> BoundSequence:
    theorem, index, block = job
    if theorem is Theorem.T6:
        return _complex_sequence(index, block, system, k_max)
    return _real_sequence(theorem, index, block, system, k_max)


def _k_star(inf: Infimum) -> float:
    if inf.justification is Justification.LIMIT_FORMULA:
        return math.inf
    return float(inf.k)


def best_bound(system: "LinearSystem", spectral: SpectralDecomposition, k_max: int) -> BoundReport:
    """
    Evaluate every applicable (block, theorem) bound for k = 1..k_max.

    The overall certificate is the smallest infimum across sequences; ties keep
    the earlier block.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    jobs = applicable_jobs(system, spectral)
    if not jobs:
        raise NoApplicableBlock("no eigenvalue block admits a closed-form bound")

    with ThreadPoolExecutor(max_workers=max(1, ORACLE_WORKERS)) as executor:
        sequences = list(executor.map(lambda job: _run_job(job, system, k_max), jobs))

    rows = [
        BoundRow(k, seq.block_index, seq.theorem, v.value_plus, v.value_minus, v.bar)
        for seq in sequences
        for k, v in zip(range(1, k_max + 1), seq.values)
    ]
    rows.sort(key=lambda r: (r.k, r.block_index, r.theorem.value))

    winner = min(sequences, key=lambda s: s.infimum.value)
    inf = winner.infimum
    direction = inf.detail if winner.theorem is Theorem.T6 and inf.detail.startswith("psi") else winner.direction
    certificate = AlphaCertificate(
        alpha=inf.value, k_star=_k_star(inf), block_index=winner.block_index,
        theorem=winner.theorem, direction=direction, justification=inf.justification,
    )
    logger.info("certificate alpha=%.6g from %s on block %d (%s)", certificate.alpha, certificate.theorem.value,
                certificate.block_index, certificate.justification.value)
    return BoundReport(rows=rows, sequences=sequences, certificate=certificate)
