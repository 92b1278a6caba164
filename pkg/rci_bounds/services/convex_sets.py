"""
Exact compact convex sets and the calculus the reachability recursion needs.

Three representations are supported: half-space polytopes, vertex polytopes and
axis-aligned boxes. Every set answers support queries; planar sets additionally
support vertex enumeration, Minkowski sums, intersections and emptiness tests.
All values are immutable once built.
"""
import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol, Sequence

import numpy as np

from ..core.config import DEDUP_TOL, EMPTINESS_TOL, SINGULAR_TOL, SYMMETRY_TOL
from ..core.errors import DimensionMismatch, DimensionUnsupported, SingularMatrix, UnboundedSet
from ..utils.helpers import convex_hull_2d

logger = logging.getLogger(__name__)

_PARALLEL_TOL = 1e-12


class SupportEvaluable(Protocol):
    dim: int

    def support(self, z: np.ndarray) -> float: ...


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if ndim == 2:
        arr = np.atleast_2d(arr)
    else:
        arr = np.atleast_1d(arr)
    arr.flags.writeable = False
    return arr


def _direction(z, dim: int) -> np.ndarray:
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != dim:
        raise DimensionMismatch(f"direction has {z.shape[0]} entries, set lives in R^{dim}")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"direction must be finite, got {z}")
    return z


class ConvexSet(ABC):
    """Common interface of the three exact representations."""

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def support(self, z) -> float: ...

    @abstractmethod
    def vertices(self) -> np.ndarray: ...

    @abstractmethod
    def to_hpoly(self) -> "HPolytope": ...


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _frozen_array(self.lower, 1)
        upper = _frozen_array(self.upper, 1)
        if lower.shape != upper.shape:
            raise DimensionMismatch(f"box bounds differ in length: {lower.shape[0]} vs {upper.shape[0]}")
        if np.any(lower > upper):
            raise ValueError(f"box needs lower <= upper, got {lower} and {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def support(self, z) -> float:
        z = _direction(z, self.dim)
        return float(np.sum(np.maximum(z * self.lower, z * self.upper)))

    def vertices(self) -> np.ndarray:
        corners = itertools.product(*zip(self.lower, self.upper))
        return VPolytope(np.array(list(corners))).vertices()

    def to_hpoly(self) -> "HPolytope":
        eye = np.eye(self.dim)
        return HPolytope(np.vstack([eye, -eye]), np.concatenate([self.upper, -self.lower]))


@dataclass(frozen=True, eq=False)
class VPolytope(ConvexSet):
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.array(self.points, dtype=float))
        if pts.size == 0:
            raise ValueError("a vertex polytope needs at least one vertex")
        kept: list[np.ndarray] = []
        for p in pts:
            if any(np.max(np.abs(p - q)) <= DEDUP_TOL for q in kept):
                continue
            kept.append(p)
        object.__setattr__(self, "points", _frozen_array(kept, 2))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def support(self, z) -> float:
        z = _direction(z, self.dim)
        return float(np.max(self.points @ z))

    def vertices(self) -> np.ndarray:
        if self.dim == 2:
            return convex_hull_2d(self.points)
        return self.points

    def to_hpoly(self) -> "HPolytope":
        if self.dim != 2:
            raise DimensionUnsupported(f"vertex-to-halfspace conversion is planar only, got n={self.dim}")
        return _hull_to_hpoly(convex_hull_2d(self.points))


@dataclass(frozen=True, eq=False)
class HPolytope(ConvexSet):
    """{x : F x <= g}. Vertex enumeration (and hence support) is planar only."""

    F: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        F = _frozen_array(self.F, 2)
        g = _frozen_array(self.g, 1)
        if F.shape[0] != g.shape[0]:
            raise DimensionMismatch(f"F has {F.shape[0]} rows but g has {g.shape[0]} entries")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "g", g)

    @property
    def dim(self) -> int:
        return self.F.shape[1]

    @cached_property
    def _enumeration(self) -> np.ndarray | None:
        if self.dim != 2:
            raise DimensionUnsupported(f"half-space polytopes are enumerated in the plane only, got n={self.dim}")
        return _enumerate_2d(self.F, self.g, EMPTINESS_TOL)

    @property
    def empty(self) -> bool:
        return self._enumeration is None

    def vertices(self) -> np.ndarray:
        verts = self._enumeration
        if verts is None:
            return np.empty((0, self.dim))
        return verts

    def support(self, z) -> float:
        z = _direction(z, self.dim)
        verts = self._enumeration
        if verts is None:
            return -math.inf
        if verts.shape[0] == 0 or not _in_cone_2d(self.F, z):
            raise UnboundedSet(f"polytope is unbounded in direction {z}")
        return float(np.max(verts @ z))

    def to_hpoly(self) -> "HPolytope":
        return self

    def contains(self, x, tol: float = EMPTINESS_TOL) -> bool:
        x = _direction(x, self.dim)
        norms = np.linalg.norm(self.F, axis=1)
        return bool(np.all(self.F @ x <= self.g + tol * np.maximum(norms, 1.0)))


@dataclass(frozen=True, eq=False)
class ImageSum:
    """Support-only view of M_1 Y_1 ⊕ ... ⊕ M_r Y_r; never materialized."""

    terms: tuple[tuple[ConvexSet, np.ndarray], ...] = field(default_factory=tuple)
    dim: int = 2

    def support(self, z) -> float:
        z = _direction(z, self.dim)
        return float(sum(support_of_image(s, M, z) for s, M in self.terms))


# ---------------------------------------------------------------------------
# planar kernels


def _enumerate_2d(F: np.ndarray, g: np.ndarray, tol: float) -> np.ndarray | None:
    """Hull vertices of {x : F x <= g} in R^2; None when empty, (0, 2) when the region holds a line."""
    norms = np.linalg.norm(F, axis=1)
    zero = norms <= _PARALLEL_TOL
    if np.any(g[zero] < -tol):
        return None
    F = F[~zero] / norms[~zero, None]
    g = g[~zero] / norms[~zero]
    if F.shape[0] == 0:
        return np.empty((0, 2))

    i, j = np.triu_indices(F.shape[0], k=1)
    det = F[i, 0] * F[j, 1] - F[i, 1] * F[j, 0]
    ok = np.abs(det) > _PARALLEL_TOL
    if np.any(ok):
        i, j, det = i[ok], j[ok], det[ok]
        x = (g[i] * F[j, 1] - g[j] * F[i, 1]) / det
        y = (F[i, 0] * g[j] - F[j, 0] * g[i]) / det
        cand = np.column_stack([x, y])
        feasible = np.all(cand @ F.T <= g + tol, axis=1)
        if np.any(feasible):
            return convex_hull_2d(cand[feasible])
        return None

    # every normal is parallel to F[0]: a one-dimensional interval problem
    c = F @ F[0]
    hi = np.min(g[c > 0] / c[c > 0]) if np.any(c > 0) else math.inf
    lo = np.max(g[c < 0] / c[c < 0]) if np.any(c < 0) else -math.inf
    if lo > hi + tol:
        return None
    return np.empty((0, 2))


def _in_cone_2d(F: np.ndarray, z: np.ndarray) -> bool:
    """Whether z lies in the cone spanned by the rows of F (so the support is finite)."""
    norms = np.linalg.norm(F, axis=1)
    rows = F[norms > _PARALLEL_TOL]
    if rows.shape[0] == 0:
        return bool(np.linalg.norm(z) == 0.0)
    if np.linalg.norm(z) == 0.0:
        return True
    angles = np.sort(np.mod(np.arctan2(rows[:, 1], rows[:, 0]), 2 * math.pi))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * math.pi]]))
    target = math.atan2(z[1], z[0]) % (2 * math.pi)
    for start, gap in zip(angles, gaps):
        if gap < math.pi - _PARALLEL_TOL:
            continue
        offset = (target - start) % (2 * math.pi)
        if _PARALLEL_TOL < offset < gap - _PARALLEL_TOL:
            return False
    return True


def _hull_to_hpoly(hull: np.ndarray) -> HPolytope:
    if hull.shape[0] >= 3:
        edges = np.roll(hull, -1, axis=0) - hull
        normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        return HPolytope(normals, np.einsum("ij,ij->i", normals, hull))
    if hull.shape[0] == 2:
        d = hull[1] - hull[0]
        d /= np.linalg.norm(d)
        n = np.array([d[1], -d[0]])
        F = np.vstack([n, -n, d, -d])
        g = np.array([n @ hull[0], -n @ hull[0], d @ hull[1], -d @ hull[0]])
        return HPolytope(F, g)
    eye = np.eye(2)
    p = hull[0]
    return HPolytope(np.vstack([eye, -eye]), np.concatenate([p, -p]))


def _require_planar(*sets) -> None:
    for s in sets:
        if s.dim != 2:
            raise DimensionMismatch(f"planar operation got a set in R^{s.dim}")


# ---------------------------------------------------------------------------
# set calculus


def support(s: SupportEvaluable, z) -> float:
    return s.support(z)


def support_of_image(s: SupportEvaluable, M, z) -> float:
    """h_{MS}(z) = h_S(M^T z), without building MS."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    z = np.asarray(z, dtype=float).reshape(-1)
    if M.shape[0] != z.shape[0] or M.shape[1] != s.dim:
        raise DimensionMismatch(f"map of shape {M.shape} cannot act on R^{s.dim} and pair with {z.shape[0]}-vectors")
    return s.support(M.T @ z)


def minkowski_diff(p: ConvexSet, w: SupportEvaluable) -> HPolytope:
    """Row-wise erosion: offsets shrink by the subtrahend's support along each normal."""
    hp = p.to_hpoly()
    if w.dim != hp.dim:
        raise DimensionMismatch(f"cannot erode a set in R^{hp.dim} by one in R^{w.dim}")
    shrink = np.array([w.support(row) for row in hp.F])
    return HPolytope(hp.F, hp.g - shrink)


def minkowski_sum_2d(p: ConvexSet, q: ConvexSet) -> VPolytope:
    _require_planar(p, q)
    vp, vq = p.vertices(), q.vertices()
    if vp.shape[0] == 0 or vq.shape[0] == 0:
        raise ValueError("Minkowski sum of an empty or line-containing set")
    sums = (vp[:, None, :] + vq[None, :, :]).reshape(-1, 2)
    return VPolytope(convex_hull_2d(sums))


def preimage(A, p: ConvexSet) -> HPolytope:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    hp = p.to_hpoly()
    if A.shape != (hp.dim, hp.dim):
        raise DimensionMismatch(f"preimage map must be {hp.dim}x{hp.dim}, got {A.shape}")
    if abs(np.linalg.det(A)) < SINGULAR_TOL:
        raise SingularMatrix(f"|det A| = {abs(np.linalg.det(A)):.3e} is below {SINGULAR_TOL}")
    return HPolytope(hp.F @ A, hp.g)


def intersect(p: ConvexSet, q: ConvexSet) -> HPolytope:
    hp, hq = p.to_hpoly(), q.to_hpoly()
    if hp.dim != hq.dim:
        raise DimensionMismatch(f"cannot intersect sets in R^{hp.dim} and R^{hq.dim}")
    joined = HPolytope(np.vstack([hp.F, hq.F]), np.concatenate([hp.g, hq.g]))
    if joined.dim != 2 or joined.empty:
        return joined
    verts = joined.vertices()
    if verts.shape[0] >= 3 and is_bounded(joined):
        return _hull_to_hpoly(verts)
    return joined


def is_bounded(p: HPolytope) -> bool:
    axes = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    return all(_in_cone_2d(p.F, z) for z in axes)


def is_empty(s: ConvexSet) -> bool:
    if isinstance(s, HPolytope):
        return s.empty
    return False


def support_pair_negativity(s: SupportEvaluable, z) -> bool:
    """Both h_S(z) and h_S(-z) negative certifies S is empty."""
    z = np.asarray(z, dtype=float)
    return s.support(z) < 0.0 and s.support(-z) < 0.0


def scale(s: ConvexSet, a: float) -> ConvexSet:
    if a < 0:
        raise ValueError(f"scale factor must be non-negative, got {a}")
    if isinstance(s, Box):
        return Box(a * s.lower, a * s.upper)
    if isinstance(s, VPolytope):
        return VPolytope(a * s.points)
    if a == 0.0:
        return VPolytope(np.zeros((1, s.dim)))
    return HPolytope(s.F, a * s.g)


def reflect(s: ConvexSet) -> ConvexSet:
    if isinstance(s, Box):
        return Box(-s.upper, -s.lower)
    if isinstance(s, VPolytope):
        return VPolytope(-s.points)
    return HPolytope(-s.F, s.g)


def linear_image(M, s: ConvexSet) -> VPolytope:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != s.dim:
        raise DimensionMismatch(f"map of shape {M.shape} cannot act on R^{s.dim}")
    verts = s.vertices()
    if verts.shape[0] == 0:
        raise ValueError("image of an empty set")
    return VPolytope(verts @ M.T)


def contains(s: ConvexSet, x, tol: float = EMPTINESS_TOL) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if isinstance(s, Box):
        return bool(np.all(s.lower - tol <= x) and np.all(x <= s.upper + tol))
    if isinstance(s, VPolytope) and s.points.shape[0] == 1:
        return bool(np.max(np.abs(s.points[0] - x)) <= tol)
    if isinstance(s, VPolytope) and s.dim != 2:
        raise DimensionUnsupported(f"vertex-polytope membership is planar only, got n={s.dim}")
    return s.to_hpoly().contains(x, tol)


def gauge(s: ConvexSet, p, tol: float = EMPTINESS_TOL) -> float:
    """inf {t >= 0 : p in t*s} for a set containing the origin; inf when p is outside every scaling."""
    hp = s.to_hpoly()
    p = _direction(p, hp.dim)
    if np.max(np.abs(p)) <= tol:
        return 0.0
    value = 0.0
    for row, offset in zip(hp.F, hp.g):
        lhs = float(row @ p)
        if offset > tol:
            value = max(value, lhs / offset)
        elif lhs > tol:
            return math.inf
    return value


def sample_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    if dim == 2:
        t = np.linspace(0.0, 2 * math.pi, count, endpoint=False)
        return np.column_stack([np.cos(t), np.sin(t)])
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(count, dim))
    return np.vstack([np.eye(dim), -np.eye(dim), dirs / np.linalg.norm(dirs, axis=1)[:, None]])


def is_symmetric(s: SupportEvaluable, count: int = 64) -> bool:
    for z in sample_directions(s.dim, count):
        a, b = s.support(z), s.support(-z)
        if abs(a - b) > SYMMETRY_TOL * max(1.0, abs(a), abs(b)):
            return False
    return True


def _offsets_positive(hp: HPolytope) -> bool:
    norms = np.linalg.norm(hp.F, axis=1)
    return bool(np.all(norms > _PARALLEL_TOL) and np.all(hp.g / np.maximum(norms, _PARALLEL_TOL) > EMPTINESS_TOL))


def is_pc_set(s: ConvexSet, count: int = 64) -> bool:
    """Full-dimensional, compact, with the origin strictly interior."""
    if isinstance(s, Box):
        return bool(np.all(s.lower < -EMPTINESS_TOL) and np.all(s.upper > EMPTINESS_TOL))
    if isinstance(s, HPolytope):
        return _offsets_positive(s) and (s.dim != 2 or (not s.empty and is_bounded(s)))
    pts = s.points
    if s.dim == 1:
        return bool(pts.min() < -EMPTINESS_TOL and pts.max() > EMPTINESS_TOL)
    if pts.shape[0] < s.dim + 1 or np.linalg.matrix_rank(pts[1:] - pts[0], tol=EMPTINESS_TOL) < s.dim:
        return False
    if s.dim == 2:
        return _offsets_positive(s.to_hpoly())
    return all(s.support(z) > EMPTINESS_TOL for z in sample_directions(s.dim, count))


def contains_origin(s: ConvexSet) -> bool:
    if isinstance(s, VPolytope) and s.dim != 2:
        return all(s.support(z) >= -EMPTINESS_TOL for z in sample_directions(s.dim, 64))
    return contains(s, np.zeros(s.dim))


def image_sum(terms: Sequence[tuple[ConvexSet, np.ndarray]], dim: int) -> ImageSum:
    return ImageSum(tuple((s, np.asarray(M, dtype=float)) for s, M in terms), dim)
