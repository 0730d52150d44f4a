# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Dense square assignment solver (Jonker-Volgenant shortest augmenting path).

One Dijkstra-style augmentation per row over the reduced costs; ties in the
column scan resolve to the lowest index, so results are deterministic.
Ported from the classic formulation used by the rectangular LSAP literature
(Crouse, IEEE TAES 2016).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

INFEASIBLE_MESSAGE = "cost matrix is infeasible (no finite-cost perfect matching)"


def solve(cnp.ndarray[cnp.float64_t, ndim=2] cost not None):
    """Return col4row: col4row[i] is the column assigned to row i."""
    if cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    cdef Py_ssize_t n = cost.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.intp)

    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] shortest = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] path = np.empty(n, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] col4row = np.full(n, -1, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] row4col = np.full(n, -1, dtype=np.intp)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] sr = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] sc = np.zeros(n, dtype=np.uint8)

    cdef Py_ssize_t cur_row, i, j, jmin, sink, tmp
    cdef double min_val, reduced, lowest
    cdef double inf = np.inf

    for cur_row in range(n):
        for j in range(n):
            shortest[j] = inf
            path[j] = -1
            sr[j] = 0
            sc[j] = 0
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            sr[i] = 1
            lowest = inf
            jmin = -1
            for j in range(n):
                if sc[j]:
                    continue
                reduced = min_val + c[i, j] - u[i] - v[j]
                if reduced < shortest[j]:
                    shortest[j] = reduced
                    path[j] = i
                if shortest[j] < lowest:
                    lowest = shortest[j]
                    jmin = j
            if jmin == -1 or lowest == inf:
                raise ValueError(INFEASIBLE_MESSAGE)
            min_val = lowest
            sc[jmin] = 1
            if row4col[jmin] == -1:
                sink = jmin
            else:
                i = row4col[jmin]

        u[cur_row] = u[cur_row] + min_val
        for i in range(n):
            if sr[i] and i != cur_row:
                u[i] = u[i] + min_val - shortest[col4row[i]]
        for j in range(n):
            if sc[j]:
                v[j] = v[j] - (min_val - shortest[j])

        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            tmp = col4row[i]
            col4row[i] = j
            j = tmp
            if i == cur_row:
                break

    return col4row
