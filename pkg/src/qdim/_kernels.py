"""Compiled inner loops of the contiguous-cell quantization DP."""

from __future__ import annotations

import numpy as np
from numba import njit

_STACK = 512


@njit(cache=True, inline="always")
def cell_cost(X, W, S1, S2, i, j, r_code):
    """Distortion of atoms i..j-1 around their best single point (0 if empty)."""
    if j <= i:
        return 0.0
    w = W[j] - W[i]
    if r_code == 2:
        s1 = S1[j] - S1[i]
        c = (S2[j] - S2[i]) - s1 * s1 / w
        return c if c > 0.0 else 0.0
    k = median_index(W, i, j)
    x = X[k]
    left = x * (W[k] - W[i]) - (S1[k] - S1[i])
    right = (S1[j] - S1[k + 1]) - x * (W[j] - W[k + 1])
    c = left + right
    return c if c > 0.0 else 0.0


@njit(cache=True, inline="always")
def median_index(W, i, j):
    """Smallest k in [i, j) whose cumulative cell weight reaches half the cell."""
    half = W[i] + 0.5 * (W[j] - W[i])
    lo = i
    hi = j - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if W[mid + 1] >= half:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True)
def _scan(prev, X, W, S1, S2, r_code, olo, end, j):
    """Best split i in [olo, end] for right end j.

    For r = 1 the median index of cell [i, j) is nondecreasing in i, so it
    is advanced by a pointer instead of searched for every i.
    """
    best = np.inf
    arg = olo
    if r_code == 2 or olo > end:
        for i in range(olo, end + 1):
            v = prev[i] + cell_cost(X, W, S1, S2, i, j, r_code)
            if v < best:
                best = v
                arg = i
        return best, arg
    k = median_index(W, olo, j)
    for i in range(olo, end + 1):
        if k < i:
            k = i
        half = W[i] + 0.5 * (W[j] - W[i])
        while W[k + 1] < half:
            k += 1
        x = X[k]
        c = x * (W[k] - W[i]) - (S1[k] - S1[i]) + (S1[j] - S1[k + 1]) - x * (W[j] - W[k + 1])
        if c < 0.0:
            c = 0.0
        v = prev[i] + c
        if v < best:
            best = v
            arg = i
    return best, arg


@njit(cache=True)
def dp_layer(prev, cur, opt, X, W, S1, S2, r_code, jlo, jhi, ilo, ihi, strict):
    """``cur[j] = min_i prev[i] + cost(i, j)`` for j in [jlo, jhi], i in [ilo, min(ihi, j - strict)].

    Divide and conquer over j, using that the minimizing i is nondecreasing in j.
    """
    stack = np.empty((_STACK, 4), dtype=np.int64)
    top = 0
    stack[0, 0] = jlo
    stack[0, 1] = jhi
    stack[0, 2] = ilo
    stack[0, 3] = ihi
    while top >= 0:
        lo = stack[top, 0]
        hi = stack[top, 1]
        olo = stack[top, 2]
        ohi = stack[top, 3]
        top -= 1
        if lo > hi:
            continue
        mid = (lo + hi) // 2
        end = mid - strict
        if ohi < end:
            end = ohi
        best, arg = _scan(prev, X, W, S1, S2, r_code, olo, end, mid)
        cur[mid] = best
        opt[mid] = arg
        top += 1
        stack[top, 0] = lo
        stack[top, 1] = mid - 1
        stack[top, 2] = olo
        stack[top, 3] = arg
        top += 1
        stack[top, 0] = mid + 1
        stack[top, 1] = hi
        stack[top, 2] = arg
        stack[top, 3] = ohi
    return cur


@njit(cache=True)
def dp_layer_naive(prev, cur, opt, X, W, S1, S2, r_code, jlo, jhi, ilo, ihi, strict):
    """Same contract as :func:`dp_layer` with a full scan (debug/oracle use)."""
    for mid in range(jlo, jhi + 1):
        end = mid - strict
        if ihi < end:
            end = ihi
        best = np.inf
        arg = ilo
        for i in range(ilo, end + 1):
            v = prev[i] + cell_cost(X, W, S1, S2, i, mid, r_code)
            if v < best:
                best = v
                arg = i
        cur[mid] = best
        opt[mid] = arg
    return cur
