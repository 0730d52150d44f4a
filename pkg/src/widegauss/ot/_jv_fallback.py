"""Pure-numpy fallback for the assignment solver.

Same shortest-augmenting-path algorithm as the compiled extension, with the
per-iteration column scan vectorized.  Reduced costs are accumulated in the
same association order as the compiled loop, so both backends return
bit-identical assignments.
"""

from __future__ import annotations

import numpy as np

INFEASIBLE_MESSAGE = "cost matrix is infeasible (no finite-cost perfect matching)"


def solve(cost: np.ndarray) -> np.ndarray:
    """Return col4row: col4row[i] is the column assigned to row i."""
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    n = cost.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.intp)

    u = np.zeros(n)
    v = np.zeros(n)
    col4row = np.full(n, -1, dtype=np.intp)
    row4col = np.full(n, -1, dtype=np.intp)

    for cur_row in range(n):
        shortest = np.full(n, np.inf)
        path = np.full(n, -1, dtype=np.intp)
        scanned_rows = np.zeros(n, dtype=bool)
        scanned_cols = np.zeros(n, dtype=bool)
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            scanned_rows[i] = True
            reduced = ((min_val + cost[i]) - u[i]) - v
            better = ~scanned_cols & (reduced < shortest)
            shortest[better] = reduced[better]
            path[better] = i
            candidates = np.where(scanned_cols, np.inf, shortest)
            jmin = int(np.argmin(candidates))
            min_val = candidates[jmin]
            if not np.isfinite(min_val):
                raise ValueError(INFEASIBLE_MESSAGE)
            scanned_cols[jmin] = True
            if row4col[jmin] == -1:
                sink = jmin
            else:
                i = row4col[jmin]

        u[cur_row] += min_val
        other = scanned_rows.copy()
        other[cur_row] = False
        idx = np.flatnonzero(other)
        u[idx] += min_val - shortest[col4row[idx]]
        cols = np.flatnonzero(scanned_cols)
        v[cols] -= min_val - shortest[cols]

        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur_row:
                break

    return col4row
