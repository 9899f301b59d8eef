"""Compiled inner loops for the bounded nested summation.

All state here is local to a call; the compiled functions release the
GIL so callers can fan Q evaluations out over a thread pool.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _suffix_sum(q, r0, cap, c):
    """Probability mass of filling r0 slots with the non-winning labels
    q[1:], each used at most ``cap`` times, multinomially weighted.

    Backward DP over labels; cur[r] is the mass for r slots over the
    labels not yet folded in.  Values stay in [0, 1].
    """
    num = q.shape[0]
    cur = np.zeros(r0 + 1)
    top = min(r0, cap)
    p = 1.0
    qlast = q[num - 1]
    for r in range(top + 1):
        cur[r] = p
        p *= qlast
    for i in range(num - 2, 0, -1):
        qi = q[i]
        maxn = min(r0, cap)
        pw = np.empty(maxn + 1)
        pw[0] = 1.0
        for n in range(1, maxn + 1):
            pw[n] = pw[n - 1] * qi
        labels_after = num - 1 - i
        nxt = np.zeros(r0 + 1)
        for r in range(r0 + 1):
            lo = r - labels_after * cap
            if lo < 0:
                lo = 0
            hi = r if r < cap else cap
            acc = 0.0
            for n in range(lo, hi + 1):
                s = cur[r - n]
                if s != 0.0:
                    acc += c[r, n] * pw[n] * s
            nxt[r] = acc
        cur = nxt
    return cur[r0]


@njit(cache=True, nogil=True)
def plurality_kernel(q, k, logc, c):
    """Q for correct-label-first distribution q over K draws.

    Outer sum over the winner's count n1; each term is assembled in log
    space (the binomial can exceed 1e80 near K=300) and the terms are
    accumulated with Kahan compensation.
    """
    num = q.shape[0]
    q1 = q[0]
    m1 = (k + 2 * num - 2) // num  # ceil((K + L - 1) / L)
    if q1 <= 0.0:
        return 0.0
    logq1 = math.log(q1)
    srest = 0.0
    for j in range(1, num):
        srest += q[j]
    total = 0.0
    comp = 0.0
    for n1 in range(m1, k + 1):
        r = k - n1
        cap = n1 - 1
        if r == 0:
            s = 1.0
        elif r <= cap:
            s = srest ** r  # cap never binds: plain multinomial total
        else:
            s = _suffix_sum(q, r, cap, c)
        if s <= 0.0:
            continue
        term = math.exp(logc[k, n1] + n1 * logq1 + math.log(s))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    if total > 1.0:
        total = 1.0
    return total
