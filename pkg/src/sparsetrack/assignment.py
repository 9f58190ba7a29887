"""Gated linear assignment.

``solve_lap`` maximizes the number of matches among pairs whose cost is within
the gate, then minimizes total cost. Gating is structural: entries above the
threshold are replaced by a penalty larger than any feasible total, so the
solver only ever uses them when no admissible pair is left, and those pairs are
dropped afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class AssignmentResult:
    matches: list[tuple[int, int]] = field(default_factory=list)
    unmatched_rows: list[int] = field(default_factory=list)
    unmatched_cols: list[int] = field(default_factory=list)

    def total_cost(self, cost: np.ndarray) -> float:
        return float(sum(cost[r, c] for r, c in self.matches))


def _as_cost(cost) -> np.ndarray:
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        if c.size == 0:
            return c.reshape(0, 0)
        raise ValueError(f"cost matrix must be 2-D, got shape {c.shape}")
    return c


def _result_from_pairs(n_rows: int, n_cols: int, pairs) -> AssignmentResult:
    pairs = sorted(pairs)
    used_r = {r for r, _ in pairs}
    used_c = {c for _, c in pairs}
    return AssignmentResult(
        matches=pairs,
        unmatched_rows=[r for r in range(n_rows) if r not in used_r],
        unmatched_cols=[c for c in range(n_cols) if c not in used_c],
    )


def solve_lap(cost, threshold: float) -> AssignmentResult:
    c = _as_cost(cost)
    n_rows, n_cols = c.shape
    if n_rows == 0 or n_cols == 0:
        return AssignmentResult([], list(range(n_rows)), list(range(n_cols)))
    allowed = np.isfinite(c) & (c <= threshold)
    if not allowed.any():
        return AssignmentResult([], list(range(n_rows)), list(range(n_cols)))
    # any single forbidden pair outweighs every admissible assignment
    finite = c[allowed]
    penalty = float(2 * min(n_rows, n_cols) * (np.abs(finite).max() + 1.0) + 1.0)
    work = np.where(allowed, c, penalty)
    rows, cols = linear_sum_assignment(work)
    pairs = [(int(r), int(k)) for r, k in zip(rows, cols) if allowed[r, k]]
    return _result_from_pairs(n_rows, n_cols, pairs)


BRUTE_FORCE_LIMIT = 8


def brute_force_lap(cost, threshold: float) -> AssignmentResult:
    """Exhaustive search over every partial injection rows -> cols.

    Memoized over (row, used-column mask) so an 8x8 problem stays cheap; the
    search space is still every admissible partial matching. Among optimal
    matchings, the lexicographically smallest sorted pair list wins.
    """
    c = _as_cost(cost)
    n_rows, n_cols = c.shape
    if n_rows > BRUTE_FORCE_LIMIT or n_cols > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute_force_lap supports at most {BRUTE_FORCE_LIMIT}x{BRUTE_FORCE_LIMIT}, got {c.shape}")
    allowed = np.isfinite(c) & (c <= threshold)
    cells = c.tolist()
    ok = allowed.tolist()

    @lru_cache(maxsize=None)
    def best(row: int, used: int):
        # returns (-cardinality, cost, pairs) minimized lexicographically
        if row == n_rows:
            return (0, 0.0, ())
        k, s, p = best(row + 1, used)
        candidates = [(k, s, p)]
        for col in range(n_cols):
            if ok[row][col] and not used >> col & 1:
                k2, s2, p2 = best(row + 1, used | 1 << col)
                candidates.append((k2 - 1, s2 + cells[row][col], ((row, col),) + p2))
        return min(candidates, key=lambda t: (t[0], round(t[1], 12), t[2]))

    _, _, pairs = best(0, 0)
    return _result_from_pairs(n_rows, n_cols, list(pairs))
