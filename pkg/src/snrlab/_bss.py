"""Compiled exact search for best subset selection.

Depth-first branch and bound over ordered supports ``sel[0] < ... <
sel[k-1]`` in the Gram domain: for the current prefix S we maintain the
Cholesky rows of G[S, S] so that residual sums of squares of extended
supports cost O(|S|) per candidate column.  Pruning uses monotonicity of
the RSS over nested supports: RSS(S united with its whole candidate
pool) bounds every leaf below a node from below, so a node whose bound
cannot beat the incumbent is cut.  The bound is only informative when
the pooled support is smaller than n (otherwise it is 0 for generic
designs), so it is evaluated only for small pools.

The search enumerates supports in lexicographic order and replaces the
incumbent only on strict improvement, which makes the reported optimum
the lexicographically smallest among ties.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["bss_search"]


@njit(cache=True, nogil=True)
def _pool_rss(G, c, U, w, t, start, yty, E_t, buf, rhs, pivot_rtol):
    """RSS of (prefix united with all columns >= start), or -1.0 if the
    pooled Gram could not be factored to working precision."""
    p = G.shape[0]
    q = p - start
    # projected Gram and right-hand side of the pool given the prefix
    for a in range(q):
        ja = start + a
        ca = c[ja]
        for s in range(t):
            ca -= U[s, ja] * w[s]
        rhs[a] = ca
        for b in range(a, q):
            jb = start + b
            g = G[ja, jb]
            for s in range(t):
                g -= U[s, ja] * U[s, jb]
            buf[a, b] = g
    # in-place Cholesky; solve L v = rhs as we go, explained = ||v||^2
    explained = 0.0
    for a in range(q):
        d2 = buf[a, a]
        for s in range(a):
            d2 -= buf[s, a] * buf[s, a]
        if d2 <= pivot_rtol * G[start + a, start + a] or d2 <= 0.0:
            return -1.0
        d = np.sqrt(d2)
        va = rhs[a]
        for s in range(a):
            va -= buf[s, a] * rhs[s]
        va /= d
        rhs[a] = va
        explained += va * va
        for b in range(a + 1, q):
            acc = buf[a, b]
            for s in range(a):
                acc -= buf[s, a] * buf[s, b]
            buf[a, b] = acc / d
    rss = yty - E_t - explained
    if rss < 0.0:
        rss = 0.0
    return rss


@njit(cache=True, nogil=True)
def bss_search(G, c, yty, k, node_budget, pivot_rtol, bound_cap):
    """Exact best-subset search on the Gram matrix ``G`` and moments c = X^T y.

    Returns (best_rss, best_sel, nodes, complete, skipped) where
    ``best_sel`` holds the optimal support (-1 entries mean the empty
    support), ``nodes`` counts candidate-column expansions, ``complete``
    is False when the node budget ran out, and ``skipped`` counts
    numerically singular column additions that were discarded.
    """
    p = G.shape[0]
    U = np.zeros((k, p))
    w = np.zeros(k)
    E = np.zeros(k + 1)
    sel = np.full(k, -1, dtype=np.int64)
    best_sel = np.full(k, -1, dtype=np.int64)
    best = yty  # empty support is feasible under ||b||_0 <= k
    nodes = 0
    skipped = 0
    complete = True
    buf = np.zeros((bound_cap, bound_cap))
    rhs = np.zeros(bound_cap)

    t = 0
    cur = 0
    while True:
        if t == k - 1:
            for j in range(cur, p):
                d2 = G[j, j]
                num = c[j]
                for s in range(t):
                    v = U[s, j]
                    d2 -= v * v
                    num -= v * w[s]
                if d2 <= pivot_rtol * G[j, j] or d2 <= 0.0:
                    skipped += 1
                    continue
                rss = yty - E[t] - num * num / d2
                if rss < best:
                    best = rss
                    for s in range(t):
                        best_sel[s] = sel[s]
                    best_sel[t] = j
            if t == 0:
                break
            t -= 1
            cur = sel[t] + 1
            continue

        if cur > p - (k - t):  # not enough columns left for a size-k support
            if t == 0:
                break
            t -= 1
            cur = sel[t] + 1
            continue

        if nodes >= node_budget:
            complete = False
            break
        nodes += 1
        j = cur
        d2 = G[j, j]
        num = c[j]
        for s in range(t):
            v = U[s, j]
            d2 -= v * v
            num -= v * w[s]
        if d2 <= pivot_rtol * G[j, j] or d2 <= 0.0:
            skipped += 1
            cur = j + 1
            continue
        d = np.sqrt(d2)
        wt = num / d
        for l in range(j + 1, p):
            acc = G[j, l]
            for s in range(t):
                acc -= U[s, j] * U[s, l]
            U[t, l] = acc / d
        sel[t] = j
        w[t] = wt
        E[t + 1] = E[t] + wt * wt

        pool = p - (j + 1)
        if pool > 0 and t + 1 + pool <= bound_cap:
            bnd = _pool_rss(G, c, U, w, t + 1, j + 1, yty, E[t + 1],
                            buf, rhs, pivot_rtol)
            if bnd >= best:
                cur = j + 1  # no leaf below this node can beat the incumbent
                continue
        t += 1
        cur = j + 1

    return best, best_sel, nodes, complete, skipped
