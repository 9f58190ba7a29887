"""CLEAR-MOT counts (MOTA, FP, FN, IDSW) and identity F1.

Both take ``gt`` and ``pred`` as mappings ``frame -> [(id, bbox), ...]``;
extra tuple fields (scores, visibility) are ignored.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from sparsetrack.assignment import solve_lap
from sparsetrack.geometry import iou_matrix

PEDESTRIAN = 1


@dataclass
class ClearReport:
    mota: float
    fp: int
    fn: int
    idsw: int
    gt_count: int
    matches: dict[int, list[tuple[int, int]]] = field(default_factory=dict, repr=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("matches")
        return d


@dataclass
class IdReport:
    idf1: float
    idtp: int
    idfp: int
    idfn: int

    def as_dict(self) -> dict:
        return asdict(self)


def filter_ground_truth(gt) -> dict[int, list[tuple[int, object]]]:
    """Drop rows flagged 0 or not of the pedestrian class."""
    out = {}
    for frame, rows in gt.items():
        kept = [(g.id, g.bbox) for g in rows if g.flag != 0 and g.cls == PEDESTRIAN]
        out[frame] = kept
    return out


def _ids_boxes(rows: Sequence) -> tuple[list[int], np.ndarray]:
    ids = [int(r[0]) for r in rows]
    boxes = np.array([tuple(r[1]) for r in rows], dtype=float).reshape(-1, 4)
    return ids, boxes


def _gt_total(gt: Mapping) -> int:
    return sum(len(v) for v in gt.values())


def clear_metrics(gt: Mapping, pred: Mapping, iou_threshold: float = 0.5) -> ClearReport:
    gt_count = _gt_total(gt)
    if gt_count == 0:
        raise ValueError("ground truth is empty")
    max_dist = 1.0 - iou_threshold
    fp = fn = idsw = 0
    current: dict[int, int] = {}  # gt id -> pred id it is currently mapped to
    last_match: dict[int, int] = {}
    per_frame: dict[int, list[tuple[int, int]]] = {}
    for frame in sorted(set(gt) | set(pred)):
        g_ids, g_boxes = _ids_boxes(gt.get(frame, []))
        p_ids, p_boxes = _ids_boxes(pred.get(frame, []))
        dist = 1.0 - iou_matrix(g_boxes, p_boxes)
        g_pos = {g: i for i, g in enumerate(g_ids)}
        p_pos = {p: j for j, p in enumerate(p_ids)}
        pairs: list[tuple[int, int]] = []
        used_g, used_p = set(), set()
        # keep standing correspondences that are still valid
        for g, p in current.items():
            if g in g_pos and p in p_pos:
                i, j = g_pos[g], p_pos[p]
                if dist[i, j] <= max_dist and i not in used_g and j not in used_p:
                    pairs.append((i, j))
                    used_g.add(i)
                    used_p.add(j)
        free_g = [i for i in range(len(g_ids)) if i not in used_g]
        free_p = [j for j in range(len(p_ids)) if j not in used_p]
        res = solve_lap(dist[np.ix_(free_g, free_p)], max_dist)
        for r, c in res.matches:
            i, j = free_g[r], free_p[c]
            g, p = g_ids[i], p_ids[j]
            if g in last_match and last_match[g] != p:
                idsw += 1
            pairs.append((i, j))
        for i, j in pairs:
            current[g_ids[i]] = p_ids[j]
            last_match[g_ids[i]] = p_ids[j]
        fn += len(g_ids) - len(pairs)
        fp += len(p_ids) - len(pairs)
        per_frame[frame] = sorted((g_ids[i], p_ids[j]) for i, j in pairs)
    mota = 1.0 - (fp + fn + idsw) / gt_count
    return ClearReport(mota, fp, fn, idsw, gt_count, per_frame)


def idf1(gt: Mapping, pred: Mapping, iou_threshold: float = 0.5) -> IdReport:
    """Identity F1 under the one-to-one gt/pred id correspondence maximizing IDTP."""
    n_gt = _gt_total(gt)
    if n_gt == 0:
        raise ValueError("ground truth is empty")
    n_pred = _gt_total(pred)
    g_index: dict[int, int] = {}
    p_index: dict[int, int] = {}
    for rows in gt.values():
        for r in rows:
            g_index.setdefault(int(r[0]), len(g_index))
    for rows in pred.values():
        for r in rows:
            p_index.setdefault(int(r[0]), len(p_index))
    overlap = np.zeros((len(g_index), len(p_index)))
    for frame in set(gt) & set(pred):
        g_ids, g_boxes = _ids_boxes(gt[frame])
        p_ids, p_boxes = _ids_boxes(pred[frame])
        hit = iou_matrix(g_boxes, p_boxes) >= iou_threshold
        for i, j in zip(*np.nonzero(hit)):
            overlap[g_index[g_ids[i]], p_index[p_ids[j]]] += 1
    idtp = 0
    if overlap.size:
        rows, cols = linear_sum_assignment(overlap, maximize=True)
        idtp = int(round(overlap[rows, cols].sum()))
    idfn = n_gt - idtp
    idfp = n_pred - idtp
    return IdReport(2 * idtp / (2 * idtp + idfp + idfn), idtp, idfp, idfn)


def format_table(rows: Sequence[Mapping], columns: Sequence[str]) -> str:
    cells = [[str(c) for c in columns]]
    for r in rows:
        cells.append([f"{r[c]:.4f}" if isinstance(r[c], float) else str(r[c]) for c in columns])
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells)
