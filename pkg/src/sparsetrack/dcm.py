"""Depth cascade matching.

Tracks and detections are each split into ``k`` equal-width pseudo-depth
levels over their own depth range. Levels are matched nearest first (smallest
pseudo-depth); whatever a level leaves unmatched is appended to the next
level's candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sparsetrack.assignment import solve_lap
from sparsetrack.geometry import iou_distance_matrix


@dataclass(frozen=True)
class DepthInterval:
    """Half-open ``[lo, hi)`` unless it is the last level, which is closed."""

    lo: float
    hi: float
    index: int
    closed: bool = False

    def contains(self, depth: float) -> bool:
        if self.closed:
            return self.lo <= depth <= self.hi
        return self.lo <= depth < self.hi


@dataclass
class DepthPartition:
    intervals: list[DepthInterval]
    subsets: list[list[int]]


@dataclass
class DcmResult:
    matched: list[tuple[int, int]] = field(default_factory=list)
    unmatched_tracks: list[int] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)


def depth_range(depths: Sequence[float]) -> tuple[float, float] | None:
    """Exact (min, max), or None for an empty input."""
    if len(depths) == 0:
        return None
    arr = np.asarray(depths, dtype=float)
    return float(arr.min()), float(arr.max())


def split_levels(lo: float, hi: float, k: int) -> list[DepthInterval]:
    if k < 1:
        raise ValueError(f"number of depth levels must be >= 1, got {k}")
    if lo > hi:
        raise ValueError(f"empty depth range [{lo}, {hi}]")
    span = hi - lo
    edges = [lo + span * i / k for i in range(k)] + [hi]
    return [DepthInterval(edges[i], edges[i + 1], i, closed=(i == k - 1)) for i in range(k)]


def partition(depths: Sequence[float], intervals: Sequence[DepthInterval]) -> DepthPartition:
    """Total, disjoint, order-preserving assignment of items to intervals.

    A value on an interior boundary goes to the higher interval. When the
    range is degenerate (all intervals a single point) everything lands in
    interval 0.
    """
    intervals = list(intervals)
    subsets: list[list[int]] = [[] for _ in intervals]
    if len(depths) == 0:
        return DepthPartition(intervals, subsets)
    d = np.asarray(depths, dtype=float)
    if intervals[0].lo == intervals[-1].hi:
        level = np.zeros(len(d), dtype=int)
    else:
        inner = np.array([iv.lo for iv in intervals[1:]])
        level = np.searchsorted(inner, d, side="right")
    lo, hi = intervals[0].lo, intervals[-1].hi
    assert np.all((d >= lo) & (d <= hi)), f"depths outside partition range [{lo}, {hi}]"
    for i, lv in enumerate(level.tolist()):
        subsets[lv].append(i)
    return DepthPartition(intervals, subsets)


def partition_by_range(depths: Sequence[float], k: int, rng: tuple[float, float] | None = None) -> DepthPartition:
    if rng is None:
        rng = depth_range(depths)
    if rng is None:
        return DepthPartition(split_levels(0.0, 0.0, k), [[] for _ in range(k)])
    return partition(depths, split_levels(rng[0], rng[1], k))


def dcm(
    track_boxes,
    track_depths: Sequence[float],
    det_boxes,
    det_depths: Sequence[float],
    k: int,
    tau: float,
    shared_depth_range: bool = False,
) -> DcmResult:
    """Match tracks to detections level by level, nearest level first.

    Boxes are ``(n, 4)`` tlbr arrays (or sequences of BBox); ``tau`` gates the
    IoU distance of every accepted pair.
    """
    if k < 1:
        raise ValueError(f"number of depth levels must be >= 1, got {k}")
    tb = np.asarray(track_boxes, dtype=float).reshape(-1, 4)
    db = np.asarray(det_boxes, dtype=float).reshape(-1, 4)
    n_t, n_d = len(tb), len(db)
    if n_t == 0 or n_d == 0:
        return DcmResult([], list(range(n_t)), list(range(n_d)))

    if shared_depth_range:
        both = np.concatenate([np.asarray(track_depths, float), np.asarray(det_depths, float)])
        rng = depth_range(both)
        t_part = partition_by_range(track_depths, k, rng)
        d_part = partition_by_range(det_depths, k, rng)
    else:
        t_part = partition_by_range(track_depths, k)
        d_part = partition_by_range(det_depths, k)

    cost_full = iou_distance_matrix(tb, db) if k > 1 else None
    result = DcmResult()
    carry_t: list[int] = []
    carry_d: list[int] = []
    for level in range(k):
        t_idx = t_part.subsets[level] + carry_t
        d_idx = d_part.subsets[level] + carry_d
        if not t_idx or not d_idx:
            carry_t, carry_d = t_idx, d_idx
            continue
        if cost_full is None:
            cost = iou_distance_matrix(tb[t_idx], db[d_idx])
        else:
            cost = cost_full[np.ix_(t_idx, d_idx)]
        res = solve_lap(cost, tau)
        result.matched.extend((t_idx[r], d_idx[c]) for r, c in res.matches)
        carry_t = [t_idx[r] for r in res.unmatched_rows]
        carry_d = [d_idx[c] for c in res.unmatched_cols]
    result.unmatched_tracks = carry_t
    result.unmatched_detections = carry_d
    return result
