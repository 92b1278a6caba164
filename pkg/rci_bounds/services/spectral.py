"""
Real Jordan structure of A^T.

Left eigenvectors (and, for declared defective eigenvalues, generalized
eigenvectors) of A are the directions every closed-form bound is evaluated in.
Complex pairs yield a rotating family of directions that is periodic when the
rotation angle is a rational multiple of pi.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from ..core.config import (
    ANGLE_MATCH_TOL,
    EIG_CLUSTER_TOL,
    MAX_ANGLE_DENOMINATOR,
    MAX_STATE_DIM,
    RESIDUAL_TOL,
)
from ..core.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    ResidualTooLarge,
    StructureRequired,
    UnsupportedSize,
    WrongBlockKind,
)

logger = logging.getLogger(__name__)


class BlockKind(str, Enum):
    REAL_POSITIVE = "RealPositive"
    REAL_NEGATIVE = "RealNegative"
    COMPLEX_PAIR = "ComplexPair"
    REAL_ZERO = "RealZero"


@dataclass(frozen=True, eq=False)
class JordanBlock:
    kind: BlockKind
    size: int
    phi: tuple[np.ndarray, ...]
    lam: float | None = None
    rho: float | None = None
    theta: float | None = None
    angle_rational: tuple[int, int] | None = None
    period: int | None = None

    @property
    def is_real(self) -> bool:
        return self.kind in (BlockKind.REAL_POSITIVE, BlockKind.REAL_NEGATIVE, BlockKind.REAL_ZERO)

    def describe(self) -> str:
        if self.kind is BlockKind.COMPLEX_PAIR:
            frac = f", theta={self.angle_rational[0]}/{self.angle_rational[1]} pi, M={self.period}" if self.angle_rational else ""
            return f"{self.kind.value} rho={self.rho:.6g} theta={self.theta:.6g}{frac}"
        return f"{self.kind.value} lambda={self.lam:.6g} size={self.size}"


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    blocks: tuple[JordanBlock, ...]
    A: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Unit norm, largest-magnitude component positive (first one on ties)."""
    v = v / np.linalg.norm(v)
    mags = np.abs(v)
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return v if v[idx] > 0 else -v


def _kind_for(lam: float) -> BlockKind:
    if abs(lam) <= EIG_CLUSTER_TOL:
        return BlockKind.REAL_ZERO
    return BlockKind.REAL_POSITIVE if lam > 0 else BlockKind.REAL_NEGATIVE


def _cluster(eigs: np.ndarray) -> list[list[complex]]:
    clusters: list[list[complex]] = []
    for ev in sorted(eigs, key=lambda e: (-e.real, -e.imag)):
        for c in clusters:
            if abs(c[0] - ev) <= EIG_CLUSTER_TOL:
                c.append(ev)
                break
        else:
            clusters.append([ev])
    return clusters


def detect_rational_angle(theta: float, max_denominator: int = MAX_ANGLE_DENOMINATOR) -> tuple[int, int] | None:
    """Best rational a/b (b <= max_denominator) with theta = (a/b) pi, if one matches to 1e-9."""
    if not 0.0 < theta < math.pi:
        raise ValueError(f"rotation angle must lie in (0, pi), got {theta}")
    frac = Fraction(theta / math.pi).limit_denominator(max_denominator)
    if frac.numerator <= 0 or abs(theta - math.pi * frac.numerator / frac.denominator) >= ANGLE_MATCH_TOL:
        return None
    return frac.numerator, frac.denominator


def rotation_period(a: int, b: int) -> int:
    return 2 * b // math.gcd(a, 2 * b)


def _real_chain(At: np.ndarray, lam: float, size: int, used: list[np.ndarray]) -> tuple[np.ndarray, ...]:
    n = At.shape[0]
    M = At - lam * np.eye(n)
    if size == 1:
        basis = null_space(M, rcond=1e-9)
        if basis.shape[1] == 0:
            # numerically simple eigenvalue: take the least singular direction
            basis = np.linalg.svd(M)[2][-1:].T
    else:
        basis = null_space(np.linalg.matrix_power(M, size), rcond=1e-9)
        if basis.shape[1] == 0:
            raise ResidualTooLarge(f"no generalized eigenvectors of order {size} for eigenvalue {lam}")

    lead = np.linalg.matrix_power(M, size - 1) @ basis
    if used:
        Q, _ = np.linalg.qr(np.column_stack(used))
        lead = lead - Q @ (Q.T @ lead)
    _, _, vh = np.linalg.svd(lead)
    top = basis @ vh[0]

    phi1 = _fix_sign(np.linalg.matrix_power(M, size - 1) @ top)
    chain = [phi1]
    for _ in range(1, size):
        nxt, *_ = np.linalg.lstsq(M, chain[-1], rcond=None)
        chain.append(nxt)
    return tuple(chain)


def _check_real_chain(At: np.ndarray, lam: float, chain: Sequence[np.ndarray]) -> None:
    res = np.linalg.norm(At @ chain[0] - lam * chain[0])
    for j in range(1, len(chain)):
        res = max(res, np.linalg.norm(At @ chain[j] - lam * chain[j] - chain[j - 1]))
    if res >= RESIDUAL_TOL:
        raise ResidualTooLarge(f"Jordan chain for eigenvalue {lam} has residual {res:.3e}")


def _complex_pair(At: np.ndarray, ev: complex) -> tuple[np.ndarray, np.ndarray]:
    n = At.shape[0]
    basis = null_space(At - ev * np.eye(n), rcond=1e-9)
    v = basis[:, 0] if basis.shape[1] else np.linalg.svd(At - ev * np.eye(n))[2][-1].conj()
    mags = np.abs(v)
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    v = v * (np.conj(v[idx]) / mags[idx])
    phi1, phi2 = v.real.copy(), -v.imag.copy()
    scale = np.linalg.norm(phi1)
    return phi1 / scale, phi2 / scale


def _check_complex_pair(At: np.ndarray, rho: float, theta: float, phi1: np.ndarray, phi2: np.ndarray) -> None:
    P = np.column_stack([phi1, phi2])
    power = np.eye(At.shape[0])
    for ell in (1, 2, 3):
        power = power @ At
        c, s = math.cos(ell * theta), math.sin(ell * theta)
        R = np.array([[c, -s], [s, c]])
        res = np.linalg.norm(power @ P - rho**ell * P @ R)
        if res >= RESIDUAL_TOL * max(1.0, rho**ell):
            raise ResidualTooLarge(f"complex pair rho={rho}, theta={theta} fails rotation identity at l={ell}: {res:.3e}")


def decompose(A, declared_structure: Sequence[tuple[float, int]] | None = None) -> SpectralDecomposition:
    """
    Split the spectrum of A^T into real Jordan blocks.

    Args:
        A: square state matrix, n <= 8
        declared_structure: (eigenvalue, block size) pairs; required for repeated eigenvalues

    Returns:
        SpectralDecomposition with blocks ordered by decreasing real part
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    n = A.shape[0]
    if n > MAX_STATE_DIM:
        raise UnsupportedSize(f"state dimension {n} exceeds {MAX_STATE_DIM}")
    At = A.T
    declared = [(float(e), int(s)) for e, s in (declared_structure or [])]
    for eig, size in declared:
        if size < 1:
            raise StructureRequired(f"declared block size must be positive, got {size} for eigenvalue {eig}")

    blocks: list[JordanBlock] = []
    for cluster in _cluster(np.linalg.eigvals(At)):
        ev = complex(np.mean(cluster))
        mult = len(cluster)
        if ev.imag < -EIG_CLUSTER_TOL:
            continue
        if ev.imag > EIG_CLUSTER_TOL:
            if mult > 1:
                raise StructureRequired(f"repeated complex eigenvalue {ev:.6g} is not supported")
            rho, theta = abs(ev), math.atan2(ev.imag, ev.real)
            phi1, phi2 = _complex_pair(At, ev)
            _check_complex_pair(At, rho, theta, phi1, phi2)
            frac = detect_rational_angle(theta)
            if frac is None:
                logger.warning("eigenvalue angle %.12g is not a rational multiple of pi (denominator <= %d)",
                               theta, MAX_ANGLE_DENOMINATOR)
            blocks.append(JordanBlock(
                kind=BlockKind.COMPLEX_PAIR, size=2, phi=(phi1, phi2), rho=rho, theta=theta,
                angle_rational=frac, period=rotation_period(*frac) if frac else None,
            ))
            continue

        lam = ev.real
        mine = [(e, s) for e, s in declared if abs(e - lam) <= max(1e-6, EIG_CLUSTER_TOL)]
        if mult > 1 and not mine:
            raise StructureRequired(f"eigenvalue {lam:.6g} has multiplicity {mult}; declare its Jordan blocks")
        if mine:
            if sum(s for _, s in mine) != mult:
                raise StructureRequired(
                    f"declared blocks for eigenvalue {lam:.6g} sum to {sum(s for _, s in mine)}, multiplicity is {mult}")
            sizes = sorted((s for _, s in mine), reverse=True)
            lam = mine[0][0]
        else:
            sizes = [1]
        used: list[np.ndarray] = []
        for size in sizes:
            chain = _real_chain(At, lam, size, used)
            _check_real_chain(At, lam, chain)
            used.append(chain[0])
            blocks.append(JordanBlock(kind=_kind_for(lam), size=size, phi=chain, lam=lam))

    logger.debug("decomposed %dx%d matrix into %d blocks", n, n, len(blocks))
    return SpectralDecomposition(blocks=tuple(blocks), A=A)


def power_direction(block: JordanBlock, j: int, l: int) -> np.ndarray:
    """(A^l)^T phi_j = sum_p C(l, p) lambda^(l-p) phi_(j-p)."""
    if not block.is_real:
        raise WrongBlockKind("power_direction needs a real block")
    if not 1 <= j <= block.size:
        raise IndexOutOfRange(f"chain index {j} outside 1..{block.size}")
    if l < 0:
        raise IndexOutOfRange(f"exponent must be non-negative, got {l}")
    out = np.zeros_like(block.phi[0])
    for p in range(0, min(j - 1, l) + 1):
        out = out + math.comb(l, p) * block.lam ** (l - p) * block.phi[j - 1 - p]
    return out


def rotating_direction(block: JordanBlock, j: int, l: int) -> np.ndarray:
    if block.kind is not BlockKind.COMPLEX_PAIR:
        raise WrongBlockKind("rotating directions exist for complex pairs only")
    if j not in (1, 2):
        raise IndexOutOfRange(f"rotating direction index must be 1 or 2, got {j}")
    if block.angle_rational is not None:
        a, b = block.angle_rational
        angle = math.pi * a * (l % block.period) / b
    else:
        ell = l % block.period if block.period else l
        angle = ell * block.theta
    c, s = math.cos(angle), math.sin(angle)
    phi1, phi2 = block.phi
    if j == 1:
        return c * phi1 - s * phi2
    return c * phi2 + s * phi1
