import csv
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..core.config import DEDUP_TOL


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _extremes(pts: np.ndarray, tol: float) -> np.ndarray:
    """Endpoints of a collinear cloud along its principal axis."""
    centered = pts - pts.mean(axis=0)
    axis = np.linalg.svd(centered, full_matrices=False)[2][0]
    proj = centered @ axis
    lo, hi = pts[int(np.argmin(proj))], pts[int(np.argmax(proj))]
    if np.max(np.abs(hi - lo)) <= tol:
        return lo[None, :]
    return np.array([lo, hi])


def convex_hull_2d(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """
    Hull of a planar point cloud.

    Args:
        points (np.ndarray): (N, 2) array, N >= 1
        tol (float): points closer than this are merged, turns smaller than this are dropped

    Returns:
        np.ndarray: hull vertices in counter-clockwise order. A single point or a
        segment (two endpoints) is returned for degenerate clouds.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("convex_hull_2d needs at least one point")
    if pts.shape[0] < 3:
        return _extremes(pts, tol)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return _extremes(pts, tol)

    # qhull keeps nearly collinear vertices of thin slivers
    ring = [pts[i] for i in hull.vertices]
    changed = True
    while changed and len(ring) >= 3:
        changed = False
        for i in range(len(ring)):
            if _cross(ring[i - 1], ring[i], ring[(i + 1) % len(ring)]) <= tol:
                del ring[i]
                changed = True
                break
    if len(ring) < 3:
        return _extremes(pts, tol)
    return np.array(ring)


def format_float(value: float | None) -> str:
    """17 significant digits so plots rebuilt from CSV are not re-rounded."""
    if value is None:
        return ""
    return f"{value:.17g}"


def write_csv(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) or v is None else v for v in row])


def parse_vector(text: str) -> np.ndarray:
    """Parse "0,0" or "0 0" into a float vector."""
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ValueError(f"empty vector literal: {text!r}")
    return np.array([float(p) for p in parts])
