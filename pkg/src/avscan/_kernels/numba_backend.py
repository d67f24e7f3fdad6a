"""Numba-jitted DP kernels: Zhang-Shasha tree edit distance and LCS table."""

import numpy as np
from numba import njit


@njit(cache=True)
def ted_kernel(labels1, lmld1, keyroots1, labels2, lmld2, keyroots2):
    n1 = labels1.shape[0]
    n2 = labels2.shape[0]
    td = np.zeros((n1, n2), dtype=np.int32)
    fd = np.zeros((n1 + 1, n2 + 1), dtype=np.int32)
    for ki in range(keyroots1.shape[0]):
        i = keyroots1[ki]
        for kj in range(keyroots2.shape[0]):
            j = keyroots2[kj]
            m = i - lmld1[i] + 2
            n = j - lmld2[j] + 2
            ioff = lmld1[i] - 1
            joff = lmld2[j] - 1
            fd[0, 0] = 0
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + 1
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + 1
            for x in range(1, m):
                for y in range(1, n):
                    if lmld1[i] == lmld1[x + ioff] and lmld2[j] == lmld2[y + joff]:
                        cost = 0 if labels1[x + ioff] == labels2[y + joff] else 1
                        best = fd[x - 1, y] + 1
                        if fd[x, y - 1] + 1 < best:
                            best = fd[x, y - 1] + 1
                        if fd[x - 1, y - 1] + cost < best:
                            best = fd[x - 1, y - 1] + cost
                        fd[x, y] = best
                        td[x + ioff, y + joff] = best
                    else:
                        p = lmld1[x + ioff] - 1 - ioff
                        q = lmld2[y + joff] - 1 - joff
                        best = fd[x - 1, y] + 1
                        if fd[x, y - 1] + 1 < best:
                            best = fd[x, y - 1] + 1
                        alt = fd[p, q] + td[x + ioff, y + joff]
                        if alt < best:
                            best = alt
                        fd[x, y] = best
    return int(td[n1 - 1, n2 - 1])


@njit(cache=True)
def lcs_table_kernel(a, b):
    m = a.shape[0]
    n = b.shape[0]
    table = np.zeros((m + 1, n + 1), dtype=np.int32)
    for i in range(1, m + 1):
        ai = a[i - 1]
        for j in range(1, n + 1):
            if ai == b[j - 1]:
                table[i, j] = table[i - 1, j - 1] + 1
            else:
                up = table[i - 1, j]
                left = table[i, j - 1]
                table[i, j] = up if up >= left else left
    return table


def warmup():
    """Trigger JIT compilation with tiny inputs."""
    z = np.zeros(1, dtype=np.int32)
    ted_kernel(z, z, z, z, z, z)
    lcs_table_kernel(z, z)
