"""
Pareto dominance, front extraction and exact hypervolume.

All objective vectors are minimization vectors: accuracy enters negated.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import HypervolumeError, ModeMismatchError
from optimizer.models.search_models import Candidate, ObjectiveMode, ParetoFront

logger = logging.getLogger(__name__)

REF_MARGIN = 0.1


def vector_dominates(u: Sequence[float], v: Sequence[float]) -> bool:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return bool(np.all(u <= v) and np.any(u < v))


def _check_mode(c: Candidate, mode: ObjectiveMode) -> None:
    if c.mode is not None and c.mode != mode.variant:
        raise ModeMismatchError(
            f"{c.fingerprint} was evaluated under mode '{c.mode.value}', "
            f"compared under '{mode.variant.value}'"
        )


def dominates(a: Candidate, b: Candidate, mode: ObjectiveMode) -> bool:
    """
    True iff a is no worse than b on every active objective and better on one.

    Raises:
        ModeMismatchError: a candidate was evaluated under another mode.
    """
    _check_mode(a, mode)
    _check_mode(b, mode)
    if a.metrics is None or b.metrics is None or not (a.feasible and b.feasible):
        raise ValueError("dominance is defined between feasible evaluated candidates only")
    return vector_dominates(mode.objective_vector(a.metrics), mode.objective_vector(b.metrics))


def objective_matrix(cands: Sequence[Candidate], mode: ObjectiveMode) -> np.ndarray:
    rows = [mode.objective_vector(c.metrics) for c in cands]
    return np.array(rows, dtype=float).reshape(len(rows), len(mode.metric_names))


def non_dominated_indices(points: np.ndarray, labels: Optional[Sequence[str]] = None) -> List[int]:
    """
    Indices of the non-dominated rows, in lexicographic order of (row, label).

    After a lexicographic sort no row can be dominated by a later one, so a
    single pass against the rows kept so far is exact.
    """
    n = len(points)
    if n == 0:
        return []
    labels = labels if labels is not None else [""] * n
    order = sorted(range(n), key=lambda i: (tuple(points[i]), labels[i]))

    kept = np.empty_like(points)
    k = 0
    result: List[int] = []
    for i in order:
        p = points[i]
        if k:
            front = kept[:k]
            if np.any(np.all(front <= p, axis=1) & np.any(front < p, axis=1)):
                continue
        kept[k] = p
        k += 1
        result.append(i)
    return result


def pareto_front(cands: Sequence[Candidate], mode: ObjectiveMode) -> ParetoFront:
    """Exact non-dominated subset of the feasible candidates"""
    feasible = [c for c in cands if c.feasible and c.metrics is not None]
    for c in feasible:
        _check_mode(c, mode)
    if not feasible:
        return ParetoFront(mode=mode)

    points = objective_matrix(feasible, mode)
    labels = [c.fingerprint for c in feasible]
    members = tuple(feasible[i] for i in non_dominated_indices(points, labels))
    return ParetoFront(mode=mode, members=members)


def reference_point(cands: Sequence[Candidate], mode: ObjectiveMode) -> Optional[Tuple[float, ...]]:
    """Worst feasible value per objective, pushed 10% further out"""
    feasible = [c for c in cands if c.feasible and c.metrics is not None]
    if not feasible:
        return None
    worst = objective_matrix(feasible, mode).max(axis=0)
    margin = np.maximum(REF_MARGIN * np.abs(worst), 1e-9)
    return tuple(float(v) for v in worst + margin)


def normalize_points(points: np.ndarray, lower: Sequence[float], upper: Sequence[float]) -> np.ndarray:
    """Map each objective from [lower, upper] onto [0, 1]"""
    lower = np.asarray(lower, dtype=float)
    span = np.asarray(upper, dtype=float) - lower
    span[span == 0] = 1.0
    return (np.asarray(points, dtype=float) - lower) / span


def _hv2d(points: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((points[:, 1], points[:, 0]))
    area = 0.0
    prev_y = ref[1]
    for x, y in points[order]:
        if y < prev_y:
            area += (ref[0] - x) * (prev_y - y)
            prev_y = y
    return float(area)


def _hv(points: np.ndarray, ref: np.ndarray) -> float:
    n, d = points.shape
    if n == 0:
        return 0.0
    if d == 1:
        return float(ref[0] - points[:, 0].min())
    if d == 2:
        return _hv2d(points, ref)

    # slice along the last objective
    points = points[np.argsort(points[:, -1], kind="stable")]
    total = 0.0
    for i in range(n):
        z = points[i, -1]
        z_next = points[i + 1, -1] if i + 1 < n else ref[-1]
        if z_next > z:
            below = points[: i + 1, :-1]
            below = below[non_dominated_indices(below)]
            total += _hv(below, ref[:-1]) * (z_next - z)
    return float(total)


def hypervolume_points(points: Sequence[Sequence[float]], ref_point: Sequence[float],
                       labels: Optional[Sequence[str]] = None) -> float:
    """
    Exact dominated hypervolume of minimization vectors.

    Raises:
        HypervolumeError: a point does not strictly dominate the reference point.
    """
    ref = np.asarray(ref_point, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, len(ref)) if len(points) else np.empty((0, len(ref)))
    if not 1 <= len(ref) <= 4:
        raise HypervolumeError(f"hypervolume supports 1 to 4 objectives, got {len(ref)}")
    for i, p in enumerate(pts):
        if not np.all(p < ref):
            label = labels[i] if labels is not None else str(tuple(p))
            raise HypervolumeError(
                f"{label} does not strictly dominate reference point {tuple(ref)}", fingerprint=label
            )
    return _hv(pts, ref)


def hypervolume(front: ParetoFront, ref_point: Sequence[float],
                mode: Optional[ObjectiveMode] = None,
                bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None) -> float:
    """
    Hypervolume of a front.

    bounds=(lower, upper) normalizes every objective to [0, 1] first; the
    reference point is normalized with the same bounds.
    """
    mode = mode or front.mode
    if not front.members:
        return 0.0
    points = objective_matrix(front.members, mode)
    ref = np.asarray(ref_point, dtype=float)
    if bounds is not None:
        points = normalize_points(points, *bounds)
        ref = normalize_points(ref.reshape(1, -1), *bounds)[0]
    return hypervolume_points(points, ref, [c.fingerprint for c in front.members])


__all__ = [
    "vector_dominates",
    "dominates",
    "objective_matrix",
    "non_dominated_indices",
    "pareto_front",
    "reference_point",
    "normalize_points",
    "hypervolume_points",
    "hypervolume",
]
