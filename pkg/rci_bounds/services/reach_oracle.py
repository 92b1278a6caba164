"""
Exact planar backwards reachability.

C_k collects the states from which some admissible policy keeps x inside X
for k steps against every disturbance in alpha*W̄. The critical scaling
alpha*_k is the smallest alpha emptying C_k; it is located by bisection and is
the reference the closed-form bounds are checked against.
"""
import asyncio
import concurrent.futures
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..core.config import (
    ALPHA_INF_K_MAX,
    ALPHA_TOL,
    EMPTINESS_TOL,
    EQUALITY_DIRECTIONS,
    EQUALITY_TOL,
    MONOTONICITY_SAMPLES,
    ORACLE_WORKERS,
    PLATEAU_RUN,
    VERTEX_CAP,
)
from ..core.errors import (
    AssumptionViolation,
    ComplexityCap,
    DimensionMismatch,
    DimensionUnsupported,
    IndexOutOfRange,
    MonotonicityViolation,
    UpperBoundNotEmpty,
)
from .convex_sets import (
    ConvexSet,
    HPolytope,
    VPolytope,
    contains_origin,
    image_sum,
    intersect,
    is_empty,
    is_pc_set,
    linear_image,
    minkowski_diff,
    minkowski_sum_2d,
    preimage,
    sample_directions,
    scale,
    support_of_image,
)
from .spectral import SpectralDecomposition, rotating_direction

logger = logging.getLogger(__name__)

_ALPHA_HI_START = 1.0
_ALPHA_HI_DOUBLINGS = 40


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """x+ = A x + B u + w with x in X, u in U, w in alpha*Wbar."""

    A: np.ndarray
    B: np.ndarray
    X: ConvexSet
    U: ConvexSet
    Wbar: ConvexSet

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        B = np.array(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        n = A.shape[0]
        if B.shape[0] != n:
            raise DimensionMismatch(f"B has {B.shape[0]} rows, A is {n}x{n}")
        if self.X.dim != n or self.Wbar.dim != n:
            raise DimensionMismatch(f"X lives in R^{self.X.dim} and Wbar in R^{self.Wbar.dim}, state is R^{n}")
        if self.U.dim != B.shape[1]:
            raise DimensionMismatch(f"U lives in R^{self.U.dim}, B has {B.shape[1]} columns")
        for name, s in (("X", self.X), ("U", self.U), ("Wbar", self.Wbar)):
            if not contains_origin(s):
                raise AssumptionViolation(f"{name} must contain the origin")
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @cached_property
    def neg_BU(self) -> VPolytope:
        return linear_image(-self.B, self.U)

    def check_assumptions(self) -> None:
        """Reachable (A, B) and PC-sets X, U. A non-PC Wbar is only reported."""
        blocks = [self.B]
        for _ in range(self.n - 1):
            blocks.append(self.A @ blocks[-1])
        rank = np.linalg.matrix_rank(np.hstack(blocks), tol=1e-8)
        if rank < self.n:
            raise AssumptionViolation(f"(A, B) is not reachable: controllability rank {rank} < {self.n}")
        for name, s in (("X", self.X), ("U", self.U)):
            if not is_pc_set(s):
                raise AssumptionViolation(f"{name} must contain the origin in its interior")
        if not is_pc_set(self.Wbar):
            logger.warning("Wbar does not contain the origin in its interior; treating it as a degenerate set")


@dataclass
class ReachResult:
    sets: list[HPolytope]
    first_empty: int | None
    alpha: float
    nesting_ok: bool = True

    @property
    def last(self) -> HPolytope | None:
        return None if self.first_empty is not None else self.sets[-1]


def _require_planar(system: LinearSystem) -> None:
    if system.n != 2:
        raise DimensionUnsupported(f"exact reachability is implemented for n = 2, got n = {system.n}")


def _nested(inner: HPolytope, outer: HPolytope) -> bool:
    return all(outer.contains(v, EMPTINESS_TOL) for v in inner.vertices())


def c_step(system: LinearSystem, current: ConvexSet, alpha: float) -> HPolytope | None:
    """One backward step; None when the result is empty."""
    _require_planar(system)
    eroded = minkowski_diff(current, scale(system.Wbar, alpha))
    if is_empty(eroded):
        return None
    grown = minkowski_sum_2d(eroded, system.neg_BU)
    nxt = intersect(preimage(system.A, grown), system.X)
    if is_empty(nxt):
        return None
    if nxt.vertices().shape[0] > VERTEX_CAP:
        raise ComplexityCap(f"iterate has {nxt.vertices().shape[0]} vertices, cap is {VERTEX_CAP}")
    return nxt


def c_sequence(system: LinearSystem, alpha: float, k_max: int) -> ReachResult:
    _require_planar(system)
    sets = [system.X.to_hpoly()]
    nesting_ok = True
    for k in range(1, k_max + 1):
        nxt = c_step(system, sets[-1], alpha)
        if nxt is None:
            logger.debug("alpha=%.8g: C_%d is empty", alpha, k)
            return ReachResult(sets, k, alpha, nesting_ok)
        if not _nested(nxt, sets[-1]):
            logger.warning("alpha=%.8g: C_%d is not contained in C_%d", alpha, k, k - 1)
            nesting_ok = False
        sets.append(nxt)
    return ReachResult(sets, None, alpha, nesting_ok)


def t_sequence(system: LinearSystem, alpha: float, k_max: int) -> list[HPolytope | None]:
    """T_0 = X, T_{k+1} = (T_k ⊖ A^k alpha W̄) ⊕ A^k(-BU); None marks an empty iterate."""
    _require_planar(system)
    W = scale(system.Wbar, alpha)
    out: list[HPolytope | None] = [system.X.to_hpoly()]
    power = np.eye(system.n)
    for _ in range(k_max):
        prev = out[-1]
        if prev is None:
            out.append(None)
        else:
            eroded = minkowski_diff(prev, image_sum([(W, power)], system.n))
            if is_empty(eroded):
                out.append(None)
            else:
                out.append(minkowski_sum_2d(eroded, linear_image(power, system.neg_BU)).to_hpoly())
        power = system.A @ power
    return out


def t_inclusion_holds(system: LinearSystem, alpha: float, k: int,
                      reach: ReachResult | None = None, ts: Sequence[HPolytope | None] | None = None) -> bool:
    """Every vertex v of C_k satisfies A^l v in T_l for l <= k."""
    reach = reach or c_sequence(system, alpha, k)
    if reach.first_empty is not None and reach.first_empty <= k:
        return True
    ts = ts if ts is not None else t_sequence(system, alpha, k)
    for v in reach.sets[k].vertices():
        x = np.array(v)
        for ell in range(k + 1):
            if ts[ell] is None or not ts[ell].contains(x, EMPTINESS_TOL):
                return False
            x = system.A @ x
    return True


def s_set(system: LinearSystem, alpha: float, k: int) -> HPolytope | None:
    """X ⊕ [⊕_{l<k-1} A^l(-BU)] ⊖ [⊕_{l<k} A^l alpha W̄], built explicitly; None when empty."""
    _require_planar(system)
    if k < 1:
        raise IndexOutOfRange(f"horizon must be >= 1, got {k}")
    grown: ConvexSet = system.X
    power = np.eye(system.n)
    powers = []
    for ell in range(k):
        powers.append(power)
        if ell <= k - 2:
            grown = minkowski_sum_2d(grown, linear_image(power, system.neg_BU))
        power = system.A @ power
    W = scale(system.Wbar, alpha)
    out = minkowski_diff(grown, image_sum([(W, P) for P in powers], system.n))
    return None if is_empty(out) else out


def _resolve_direction(z, spectral: SpectralDecomposition | None) -> np.ndarray:
    if isinstance(z, tuple):
        if spectral is None:
            raise ValueError("a (block, j) direction needs the spectral decomposition")
        block_index, j, *rest = z
        if not 0 <= block_index < len(spectral.blocks):
            raise IndexOutOfRange(f"block {block_index} outside 0..{len(spectral.blocks) - 1}")
        block = spectral.blocks[block_index]
        if block.is_real:
            if not 1 <= j <= block.size:
                raise IndexOutOfRange(f"chain index {j} outside 1..{block.size}")
            return block.phi[j - 1]
        return rotating_direction(block, j, rest[0] if rest else 0)
    return np.asarray(z, dtype=float)


def s_emptiness(system: LinearSystem, alpha: float, k: int, z,
                spectral: SpectralDecomposition | None = None) -> tuple[float, bool]:
    """
    Support bound on S_k along z, and whether S_k is certified empty.

    z is a vector, or (block, j) / (block, j, l0) naming a spectral direction.
    The returned value bounds h_{S_k}(z) from above; emptiness is certified when
    the bounds along z and -z are both negative.
    """
    z = _resolve_direction(z, spectral)
    if k < 1:
        raise IndexOutOfRange(f"horizon must be >= 1, got {k}")

    def bound(d: np.ndarray) -> float:
        total = system.X.support(d)
        power = np.eye(system.n)
        for ell in range(k):
            if ell <= k - 2:
                total += support_of_image(system.neg_BU, power, d)
            total -= alpha * support_of_image(system.Wbar, power, d)
            power = system.A @ power
        return total

    plus, minus = bound(z), bound(-z)
    return plus, bool(plus < 0.0 and minus < 0.0)


def _empty_at(system: LinearSystem, alpha: float, k: int) -> bool:
    return c_sequence(system, alpha, k).first_empty is not None


def _upper_bracket(system: LinearSystem, k: int, alpha_hi: float | None) -> float:
    if alpha_hi is not None:
        if not _empty_at(system, alpha_hi, k):
            raise UpperBoundNotEmpty(f"C_{k} is not empty at alpha_hi={alpha_hi}")
        return alpha_hi
    hi = _ALPHA_HI_START
    for _ in range(_ALPHA_HI_DOUBLINGS):
        if _empty_at(system, hi, k):
            return hi
        hi *= 2.0
    raise UpperBoundNotEmpty(f"C_{k} stays nonempty up to alpha={hi / 2.0:.3g}")


def _check_monotone(system: LinearSystem, k: int, hi: float) -> None:
    seen_empty = False
    for a in np.linspace(0.0, hi, MONOTONICITY_SAMPLES):
        empty = _empty_at(system, float(a), k)
        if seen_empty and not empty:
            raise MonotonicityViolation(f"C_{k} is empty below alpha={a:.6g} but nonempty at it")
        seen_empty = seen_empty or empty


def critical_alpha(system: LinearSystem, k: int, tol: float = ALPHA_TOL, alpha_hi: float | None = None) -> float:
    """Midpoint of a bisection bracket of width <= tol around inf{alpha : C_k empty}."""
    _require_planar(system)
    if k < 1:
        raise IndexOutOfRange(f"horizon must be >= 1, got {k}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if _empty_at(system, 0.0, k):
        logger.info("C_%d is empty without disturbance", k)
        return 0.0
    hi = _upper_bracket(system, k, alpha_hi)
    _check_monotone(system, k, hi)
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _empty_at(system, mid, k):
            hi = mid
        else:
            lo = mid
        logger.debug("k=%d bracket [%.8g, %.8g]", k, lo, hi)
    return 0.5 * (lo + hi)


async def critical_alpha_sweep(system: LinearSystem, ks: Sequence[int], tol: float = ALPHA_TOL,
                               alpha_hi: float | None = None, max_workers: int = ORACLE_WORKERS) -> list[float]:
    """critical_alpha for every k in ks, evaluated on a thread pool; results follow ks."""
    loop = asyncio.get_running_loop()
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        futures = [
            loop.run_in_executor(executor, critical_alpha, system, k, tol, alpha_hi)
            for k in ks
        ]
        results = await asyncio.gather(*futures)
    logger.info("oracle sweep finished for %d horizons", len(results))
    return list(results)


def critical_alpha_table(system: LinearSystem, ks: Sequence[int], tol: float = ALPHA_TOL,
                         alpha_hi: float | None = None) -> list[float]:
    return asyncio.run(critical_alpha_sweep(system, ks, tol, alpha_hi))


def critical_alpha_infinity(system: LinearSystem, k_max: int = ALPHA_INF_K_MAX, tol: float = ALPHA_TOL,
                            alpha_hi: float | None = None) -> tuple[float, int]:
    """Estimate of lim alpha*_k: stops once PLATEAU_RUN successive changes stay below tol."""
    value, run, hi = math.nan, 0, alpha_hi
    for k in range(1, k_max + 1):
        try:
            nxt = critical_alpha(system, k, tol, hi)
        except UpperBoundNotEmpty:
            nxt = critical_alpha(system, k, tol, None)
        if k > 1 and abs(nxt - value) < tol:
            run += 1
        else:
            run = 0
        value = nxt
        hi = value + tol if value > 0.0 else None
        if run >= PLATEAU_RUN:
            logger.info("alpha* plateau %.6g reached at k=%d", value, k)
            return value, k
    logger.info("no plateau up to k=%d; reporting alpha*_%d=%.6g", k_max, k_max, value)
    return value, k_max


def autonomous_equality_check(system: LinearSystem, alpha: float, k: int) -> bool:
    """C_k from the recursion equals the intersection of (A^l)^-1 (X ⊖ R_l), l = 0..k, with U = {0}."""
    _require_planar(system)
    if any(system.neg_BU.support(z) > EMPTINESS_TOL for z in sample_directions(system.n, 8)):
        raise AssumptionViolation("the closed intersection form needs U = {0}")

    recursive = c_sequence(system, alpha, k).last
    W = scale(system.Wbar, alpha)
    closed: HPolytope | None = system.X.to_hpoly()
    power = np.eye(system.n)
    erosion_terms: list[tuple[ConvexSet, np.ndarray]] = []
    for ell in range(1, k + 1):
        erosion_terms.append((W, power))
        power = system.A @ power
        eroded = minkowski_diff(system.X, image_sum(erosion_terms, system.n))
        if is_empty(eroded):
            closed = None
            break
        closed = intersect(closed, preimage(power, eroded))
        if is_empty(closed):
            closed = None
            break

    if recursive is None or closed is None:
        return recursive is None and closed is None
    for z in sample_directions(system.n, EQUALITY_DIRECTIONS):
        a, b = recursive.support(z), closed.support(z)
        if abs(a - b) > EQUALITY_TOL * max(1.0, abs(a), abs(b)):
            logger.debug("support mismatch along %s: %.12g vs %.12g", z, a, b)
            return False
    return True

