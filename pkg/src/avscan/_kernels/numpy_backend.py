"""Pure-numpy fallback kernels (no numba).

Row-vectorized: the LCS row update uses the running-max trick and the
Zhang-Shasha forest DP resolves the in-row dependency with a prefix-min
scan, so both stay correct without scalar Python inner loops.
"""

import numpy as np


def ted_kernel(labels1, lmld1, keyroots1, labels2, lmld2, keyroots2):
    n1 = labels1.shape[0]
    n2 = labels2.shape[0]
    td = np.zeros((n1, n2), dtype=np.int32)
    for i in keyroots1:
        m = int(i - lmld1[i] + 2)
        ioff = int(lmld1[i]) - 1
        row_anchor = lmld1[ioff + 1: ioff + m] == lmld1[i]
        p_arr = lmld1[ioff + 1: ioff + m] - 1 - ioff
        rlabs = labels1[ioff + 1: ioff + m]
        for j in keyroots2:
            n = int(j - lmld2[j] + 2)
            joff = int(lmld2[j]) - 1
            col_anchor = lmld2[joff + 1: joff + n] == lmld2[j]
            q_arr = lmld2[joff + 1: joff + n] - 1 - joff
            clabs = labels2[joff + 1: joff + n]
            tcols = joff + 1 + np.arange(n - 1)
            anchor_cols = np.nonzero(col_anchor)[0]
            fd = np.zeros((m, n), dtype=np.int32)
            fd[:, 0] = np.arange(m, dtype=np.int32)
            fd[0, :] = np.arange(n, dtype=np.int32)
            span = np.arange(n, dtype=np.int32)
            for x in range(1, m):
                prev = fd[x - 1]
                xi = ioff + x
                cand_up = prev[1:] + 1
                gather = fd[p_arr[x - 1], q_arr] + td[xi, tcols]
                if row_anchor[x - 1]:
                    cost = (rlabs[x - 1] != clabs).astype(np.int32)
                    cand_diag = prev[:-1] + cost
                    cand = np.where(col_anchor,
                                    np.minimum(cand_up, cand_diag),
                                    np.minimum(cand_up, gather))
                else:
                    cand = np.minimum(cand_up, gather)
                full = np.empty(n, dtype=np.int32)
                full[0] = x
                full[1:] = cand
                fd[x] = np.minimum.accumulate(full - span) + span
                if row_anchor[x - 1] and anchor_cols.size:
                    td[xi, tcols[anchor_cols]] = fd[x, 1 + anchor_cols]
    return int(td[n1 - 1, n2 - 1])


def lcs_table_kernel(a, b):
    m = a.shape[0]
    n = b.shape[0]
    table = np.zeros((m + 1, n + 1), dtype=np.int32)
    if n == 0 or m == 0:
        return table
    for i in range(1, m + 1):
        prev = table[i - 1]
        cand = np.where(b == a[i - 1], prev[:-1] + 1, 0).astype(np.int32)
        row = np.maximum(prev[1:], cand)
        np.maximum.accumulate(row, out=row)
        table[i, 1:] = row
    return table


def warmup():
    pass
