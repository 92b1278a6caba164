"""
Greedy disturbance attacks along a real eigen-direction.

Projecting the state on a left eigenvector phi of A gives the scalar dynamics
xi+ = lambda*xi + upsilon + omega. The attacker plays the extreme omega in the
sign that grows |xi|; the worst-case defender plays the extreme upsilon that
pulls back. Scalar moves are lifted to full-state disturbances in alpha*W̄.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core.config import ATTACK_STEPS_FALLBACK, EMPTINESS_TOL
from ..core.errors import ConfigError, DegenerateProjection, IndexOutOfRange, InfeasibleOmega, WrongBlockKind
from .convex_sets import Box, ConvexSet, contains, gauge
from .spectral import SpectralDecomposition

logger = logging.getLogger(__name__)

Defender = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ProjectedSystem:
    lam: float
    phi: np.ndarray
    xi: tuple[float, float]
    upsilon: tuple[float, float]
    omega: tuple[float, float]
    alpha: float

    def __post_init__(self):
        if self.omega[1] - self.omega[0] <= 0.0:
            raise DegenerateProjection(f"disturbance interval {self.omega} has zero width along phi")
        if not self.xi[0] < 0.0 < self.xi[1]:
            raise DegenerateProjection(f"projected state interval {self.xi} does not contain 0 in its interior")
        if self.upsilon[0] > self.upsilon[1] or self.alpha < 0.0:
            raise ValueError(f"invalid projection: upsilon={self.upsilon}, alpha={self.alpha}")

    def inside(self, xi: float) -> bool:
        return self.xi[0] - EMPTINESS_TOL <= xi <= self.xi[1] + EMPTINESS_TOL


@dataclass(frozen=True)
class GreedyMove:
    omega: float
    upsilon: float
    xi_next: float


@dataclass
class AttackStep:
    k: int
    xi: float
    omega: float | None = None
    upsilon: float | None = None
    x: np.ndarray | None = None
    u: np.ndarray | None = None
    w: np.ndarray | None = None
    in_X: bool = True


@dataclass
class AttackTrace:
    mode: str
    steps: list[AttackStep] = field(default_factory=list)
    exit_step: int | None = None
    state_exit_step: int | None = None
    max_steps: int = 0

    def summary(self) -> str:
        if self.exit_step is None:
            return f"no exit within {self.max_steps}"
        return f"exit at k={self.exit_step}"

    def rows(self) -> tuple[list[str], list[list[object]]]:
        if self.mode == "scalar":
            return ["k", "xi", "omega", "upsilon"], [[s.k, s.xi, s.omega, s.upsilon] for s in self.steps]
        n = self.steps[0].x.shape[0]
        m = next((s.u.shape[0] for s in self.steps if s.u is not None), 0)
        header = ["k", *(f"x{i}" for i in range(1, n + 1)), *(f"u{i}" for i in range(1, m + 1)),
                  *(f"w{i}" for i in range(1, n + 1)), "in_X"]
        rows = []
        for s in self.steps:
            u = [float(v) for v in s.u] if s.u is not None else [None] * m
            w = [float(v) for v in s.w] if s.w is not None else [None] * n
            rows.append([s.k, *(float(v) for v in s.x), *u, *w, int(s.in_X)])
        return header, rows


def project(system, spectral: SpectralDecomposition, block_index: int, alpha: float) -> ProjectedSystem:
    if not 0 <= block_index < len(spectral.blocks):
        raise IndexOutOfRange(f"block {block_index} outside 0..{len(spectral.blocks) - 1}")
    block = spectral.blocks[block_index]
    if not block.is_real:
        raise WrongBlockKind("real block required")
    phi = block.phi[0]
    neg_BU = system.neg_BU
    return ProjectedSystem(
        lam=block.lam,
        phi=phi,
        xi=(-system.X.support(-phi), system.X.support(phi)),
        # h_BU(z) = h_{-BU}(-z)
        upsilon=(-neg_BU.support(phi), neg_BU.support(-phi)),
        omega=(-system.Wbar.support(-phi), system.Wbar.support(phi)),
        alpha=alpha,
    )


def _push_up(p: ProjectedSystem, xi: float) -> bool:
    # ties resolve to the positive branch
    return (p.lam * xi if p.lam < 0.0 else xi) >= 0.0


def greedy_step(p: ProjectedSystem, xi: float) -> GreedyMove:
    if _push_up(p, xi):
        omega, upsilon = p.alpha * p.omega[1], p.upsilon[0]
    else:
        omega, upsilon = p.alpha * p.omega[0], p.upsilon[1]
    return GreedyMove(omega, upsilon, p.lam * xi + upsilon + omega)


def analytic_exit_estimate(p: ProjectedSystem, xi0: float = 0.0) -> float | None:
    """Steps for the greedy recurrence to leave Xi when lambda > 1, None when no exit is forced."""
    if p.lam <= 1.0:
        return None
    if xi0 >= 0.0:
        drift, bound = p.alpha * p.omega[1] + p.upsilon[0], p.xi[1]
    else:
        drift, bound = -(p.alpha * p.omega[0] + p.upsilon[1]), -p.xi[0]
    offset = drift / (p.lam - 1.0)
    start = abs(xi0) + offset
    if start <= 0.0:
        return None
    return max(0.0, math.log((bound + offset) / start) / math.log(p.lam))


def default_max_steps(p: ProjectedSystem, xi0: float = 0.0) -> int:
    estimate = analytic_exit_estimate(p, xi0)
    if estimate is None:
        return ATTACK_STEPS_FALLBACK
    return max(1, 10 * math.ceil(estimate))


def simulate_scalar(p: ProjectedSystem, xi0: float, max_steps: int | None = None) -> AttackTrace:
    if not p.inside(xi0):
        raise ValueError(f"initial projected state {xi0} lies outside {p.xi}")
    if max_steps is None:
        max_steps = default_max_steps(p, xi0)
    trace = AttackTrace(mode="scalar", max_steps=max_steps)
    xi = float(xi0)
    for k in range(max_steps + 1):
        if not p.inside(xi):
            trace.steps.append(AttackStep(k, xi, in_X=False))
            trace.exit_step = trace.state_exit_step = k
            break
        if k == max_steps:
            trace.steps.append(AttackStep(k, xi))
            break
        move = greedy_step(p, xi)
        trace.steps.append(AttackStep(k, xi, omega=move.omega, upsilon=move.upsilon))
        xi = move.xi_next
    logger.info("scalar attack: %s", trace.summary())
    return trace


def lift_disturbance(system, phi, omega: float, alpha: float) -> np.ndarray:
    """Point w of alpha*W̄ on the ray of the phi-extreme vertex with phi.w = omega."""
    phi = np.asarray(phi, dtype=float)
    if abs(omega) <= 1e-15:
        return np.zeros(system.n)
    verts = system.Wbar.vertices()
    sign = 1.0 if omega > 0 else -1.0
    best = verts[int(np.argmax(verts @ (sign * phi)))]
    reach = float(phi @ best)
    if sign * reach <= 0.0:
        raise DegenerateProjection(f"disturbance set has no extent along {sign:+.0f}phi")
    if abs(omega) > alpha * abs(reach) * (1.0 + 1e-12) + 1e-15:
        raise InfeasibleOmega(f"|omega|={abs(omega):.6g} exceeds alpha*h_W={alpha * abs(reach):.6g}")
    return (omega / reach) * best


# ---------------------------------------------------------------------------
# defenders


def _input_vertices(U: ConvexSet) -> np.ndarray:
    verts = U.vertices()
    return verts.reshape(-1, U.dim)


def _worst_case_defender(system, p: ProjectedSystem, gain=None) -> Defender:
    verts = _input_vertices(system.U)
    pull = verts @ (system.B.T @ p.phi)
    low, high = verts[int(np.argmin(pull))], verts[int(np.argmax(pull))]

    def defend(k: int, x: np.ndarray) -> np.ndarray:
        return low if _push_up(p, float(p.phi @ x)) else high

    return defend


def _zero_defender(system, p: ProjectedSystem, gain=None) -> Defender:
    zero = np.zeros(system.m)
    return lambda k, x: zero


def _clamp(U: ConvexSet, u: np.ndarray) -> np.ndarray:
    if isinstance(U, Box):
        return np.clip(u, U.lower, U.upper)
    g = gauge(U, u)
    return u if g <= 1.0 else u / g


def _saturating_defender(system, p: ProjectedSystem, gain=None) -> Defender:
    if gain is None:
        # least-squares deadbeat gain: minimizes ||A + B K||
        K = -np.linalg.pinv(system.B) @ system.A
    else:
        K = np.atleast_2d(np.asarray(gain, dtype=float))
        if K.shape != (system.m, system.n):
            raise ConfigError(f"feedback gain must be {system.m}x{system.n}, got {K.shape}")
    return lambda k, x: _clamp(system.U, K @ x)


DEFENDERS: dict[str, Callable[..., Defender]] = {
    "projected-worst-case": _worst_case_defender,
    "zero": _zero_defender,
    "saturating-feedback": _saturating_defender,
}


def simulate_fullstate(system, spectral: SpectralDecomposition, block_index: int, alpha: float, x0,
                       max_steps: int | None = None, defender: str | Defender = "projected-worst-case",
                       gain=None) -> AttackTrace:
    p = project(system, spectral, block_index, alpha)
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != system.n:
        raise ConfigError(f"x0 has {x.shape[0]} entries, state is R^{system.n}")
    if not contains(system.X, x):
        raise ConfigError(f"x0={x} lies outside X")
    if isinstance(defender, str):
        if defender not in DEFENDERS:
            raise ConfigError(f"unknown defender {defender!r}; choose from {sorted(DEFENDERS)}")
        policy = DEFENDERS[defender](system, p, gain)
    else:
        policy = defender
    if max_steps is None:
        max_steps = default_max_steps(p, float(p.phi @ x))

    trace = AttackTrace(mode="full", max_steps=max_steps)
    for k in range(max_steps + 1):
        xi = float(p.phi @ x)
        in_X = contains(system.X, x)
        if not in_X and trace.state_exit_step is None:
            trace.state_exit_step = k
        if not p.inside(xi):
            trace.steps.append(AttackStep(k, xi, x=x, in_X=in_X))
            trace.exit_step = k
            break
        if k == max_steps:
            trace.steps.append(AttackStep(k, xi, x=x, in_X=in_X))
            break
        move = greedy_step(p, xi)
        u = np.asarray(policy(k, x), dtype=float).reshape(-1)
        w = lift_disturbance(system, p.phi, move.omega, alpha)
        upsilon = float(p.phi @ (system.B @ u))
        trace.steps.append(AttackStep(k, xi, omega=move.omega, upsilon=upsilon, x=x, u=u, w=w, in_X=in_X))
        x = system.A @ x + system.B @ u + w
    logger.info("full-state attack (%s): %s, state left X at %s", defender if isinstance(defender, str) else "custom",
                trace.summary(), trace.state_exit_step)
    return trace


# ---------------------------------------------------------------------------
# denial of service


def dos_threshold(system) -> float:
    """Smallest alpha with -BU inside alpha*W̄."""
    return max(gauge(system.Wbar, v) for v in system.neg_BU.vertices())


def dos_feasible(system, alpha: float) -> bool:
    return dos_threshold(system) <= alpha + EMPTINESS_TOL


def dos_disturbance(system, u) -> np.ndarray:
    """The cancelling disturbance w = -B u."""
    return -system.B @ np.asarray(u, dtype=float).reshape(-1)
