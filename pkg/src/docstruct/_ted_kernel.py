"""Compiled Zhang-Shasha forest-distance kernel.

Trees arrive flattened in postorder: ``lmld[i]`` is the leftmost leaf
descendant of node ``i``, ``keyroots`` lists the highest node for each
distinct leftmost leaf in ascending order, ``labels`` encodes
(tag, rowspan, colspan), and cell text is a concatenated code-point buffer
sliced by ``offsets``.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def levenshtein(a, b):
    n = a.shape[0]
    m = b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            v = prev[j - 1] + cost
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            cur[j] = v
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True)
def _rename(i, j, lab1, td1, off1, txt1, lab2, off2, txt2, mismatch, content):
    if lab1[i] != lab2[j]:
        return mismatch
    if not content or not td1[i]:
        return 0.0
    a = txt1[off1[i]:off1[i + 1]]
    b = txt2[off2[j]:off2[j + 1]]
    longest = max(a.shape[0], b.shape[0])
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


@njit(cache=True)
def tree_distance(lmld1, kr1, lab1, td1, off1, txt1,
                  lmld2, kr2, lab2, td2, off2, txt2,
                  mismatch, content):
    n1 = lmld1.shape[0]
    n2 = lmld2.shape[0]
    treedist = np.zeros((n1, n2))
    ren = np.full((n1, n2), -1.0)
    fd = np.zeros((n1 + 1, n2 + 1))
    for a in range(kr1.shape[0]):
        i = kr1[a]
        li = lmld1[i]
        m = i - li + 2
        for b in range(kr2.shape[0]):
            j = kr2[b]
            lj = lmld2[j]
            n = j - lj + 2
            fd[0, 0] = 0.0
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + mismatch
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + mismatch
            for x in range(1, m):
                xi = li + x - 1
                lx = lmld1[xi]
                for y in range(1, n):
                    yj = lj + y - 1
                    ly = lmld2[yj]
                    v = fd[x - 1, y] + mismatch
                    w = fd[x, y - 1] + mismatch
                    if w < v:
                        v = w
                    if lx == li and ly == lj:
                        r = ren[xi, yj]
                        if r < 0.0:
                            r = _rename(xi, yj, lab1, td1, off1, txt1, lab2, off2, txt2,
                                        mismatch, content)
                            ren[xi, yj] = r
                        w = fd[x - 1, y - 1] + r
                        if w < v:
                            v = w
                        fd[x, y] = v
                        treedist[xi, yj] = v
                    else:
                        w = fd[lx - li, ly - lj] + treedist[xi, yj]
                        if w < v:
                            v = w
                        fd[x, y] = v
    return treedist[n1 - 1, n2 - 1]
