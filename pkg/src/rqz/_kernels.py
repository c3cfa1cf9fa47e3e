"""Compiled inner loops for the rotation-based reduction.

The interleaved Givens elimination is O(n^3) scalar work and dominates the
preprocessing cost, so it is compiled with numba.  The main kernel defers
column-rotation application to block boundaries and replays the rotations
row-wise, keeping every bulk memory pass contiguous; a small panel around the
elimination front is updated eagerly so the sequential rotation recurrence
sees exact values.  Left (row) and right (column) rotations commute as
operators, which makes the reordering valid.
"""

import numpy as np
from numba import njit

_NB = 24  # rotation steps deferred per block


@njit(cache=True)
def _rot(x, y):
    if y == 0.0:
        if x >= 0.0:
            return 1.0, 0.0, x
        return -1.0, -0.0, -x
    if x == 0.0:
        if y >= 0.0:
            return 0.0, 1.0, y
        return 0.0, -1.0, -y
    ax = abs(x)
    ay = abs(y)
    if ax >= ay:
        t = y / x
        u = np.sqrt(1.0 + t * t)
        if x < 0.0:
            u = -u
        c = 1.0 / u
        return c, t * c, x * u
    t = x / y
    u = np.sqrt(1.0 + t * t)
    if y < 0.0:
        u = -u
    s = 1.0 / u
    return t * s, s, y * u


@njit(cache=True)
def hess_tri_kernel_naive(A, B, Q, Z, accumulate):
    """Reference Moler-Stewart interleave; straightforward application."""
    n = A.shape[0]
    for c in range(n - 2):
        for r in range(n - 1, c + 1, -1):
            x = A[r - 1, c]
            y = A[r, c]
            if y != 0.0:
                co, si, nrm = _rot(x, y)
                for j in range(c, n):
                    t1 = A[r - 1, j]
                    t2 = A[r, j]
                    A[r - 1, j] = co * t1 + si * t2
                    A[r, j] = -si * t1 + co * t2
                A[r - 1, c] = nrm
                for j in range(r - 1, n):
                    t1 = B[r - 1, j]
                    t2 = B[r, j]
                    B[r - 1, j] = co * t1 + si * t2
                    B[r, j] = -si * t1 + co * t2
                if accumulate:
                    for i in range(n):
                        t1 = Q[i, r - 1]
                        t2 = Q[i, r]
                        Q[i, r - 1] = co * t1 + si * t2
                        Q[i, r] = -si * t1 + co * t2
            A[r, c] = 0.0
            x = B[r, r]
            y = B[r, r - 1]
            if y != 0.0:
                co, si, nrm = _rot(x, y)
                for i in range(r + 1):
                    t1 = B[i, r]
                    t2 = B[i, r - 1]
                    B[i, r] = co * t1 + si * t2
                    B[i, r - 1] = -si * t1 + co * t2
                B[r, r] = nrm
                for i in range(n):
                    t1 = A[i, r]
                    t2 = A[i, r - 1]
                    A[i, r] = co * t1 + si * t2
                    A[i, r - 1] = -si * t1 + co * t2
                if accumulate:
                    for i in range(n):
                        t1 = Z[i, r]
                        t2 = Z[i, r - 1]
                        Z[i, r] = co * t1 + si * t2
                        Z[i, r - 1] = -si * t1 + co * t2
            B[r, r - 1] = 0.0


@njit(cache=True)
def hess_tri_kernel(A, B, Q, Z, accumulate):
    """Reduce (A, B) with B upper triangular to Hessenberg-triangular form.

    Zeroes A[r, c] bottom-up per column with row rotations on (r-1, r) and
    repairs the B fill with column rotations, exactly as the naive kernel,
    but column rotations are applied to the bulk of the rows in deferred
    row-major passes.  Row rotations never touch row 0, so Q keeps e1 as its
    first column.
    """
    n = A.shape[0]
    rowco = np.empty(_NB, dtype=np.float64)
    rowsi = np.empty(_NB, dtype=np.float64)
    colco = np.empty(_NB, dtype=np.float64)
    colsi = np.empty(_NB, dtype=np.float64)
    for c in range(n - 2):
        rhi = n - 1
        while rhi > c + 1:
            rlo = rhi - _NB + 1
            if rlo < c + 2:
                rlo = c + 2
            nk = rhi - rlo + 1
            prlo = rlo - 2
            if prlo < 0:
                prlo = 0
            for k in range(nk):
                r = rhi - k
                x = A[r - 1, c]
                y = A[r, c]
                co, si, nrm = _rot(x, y)
                rowco[k] = co
                rowsi[k] = si
                if si != 0.0:
                    A[r - 1, c] = nrm
                    for j in range(c + 1, n):
                        t1 = A[r - 1, j]
                        t2 = A[r, j]
                        A[r - 1, j] = co * t1 + si * t2
                        A[r, j] = -si * t1 + co * t2
                    for j in range(r - 1, n):
                        t1 = B[r - 1, j]
                        t2 = B[r, j]
                        B[r - 1, j] = co * t1 + si * t2
                        B[r, j] = -si * t1 + co * t2
                A[r, c] = 0.0
                x = B[r, r]
                y = B[r, r - 1]
                co, si, nrm = _rot(x, y)
                colco[k] = co
                colsi[k] = si
                if si != 0.0:
                    # panel part of the column rotation; rows below prlo are
                    # handled in the deferred pass
                    B[r, r] = nrm
                    for i in range(prlo, r):
                        t1 = B[i, r]
                        t2 = B[i, r - 1]
                        B[i, r] = co * t1 + si * t2
                        B[i, r - 1] = -si * t1 + co * t2
                B[r, r - 1] = 0.0
            # deferred, row-major application of the block's column rotations
            for i in range(prlo):
                for k in range(nk):
                    si = colsi[k]
                    if si != 0.0:
                        r = rhi - k
                        co = colco[k]
                        t1 = B[i, r]
                        t2 = B[i, r - 1]
                        B[i, r] = co * t1 + si * t2
                        B[i, r - 1] = -si * t1 + co * t2
            for i in range(n):
                for k in range(nk):
                    si = colsi[k]
                    if si != 0.0:
                        r = rhi - k
                        co = colco[k]
                        t1 = A[i, r]
                        t2 = A[i, r - 1]
                        A[i, r] = co * t1 + si * t2
                        A[i, r - 1] = -si * t1 + co * t2
            if accumulate:
                for i in range(n):
                    for k in range(nk):
                        si = rowsi[k]
                        if si != 0.0:
                            r = rhi - k
                            co = rowco[k]
                            t1 = Q[i, r - 1]
                            t2 = Q[i, r]
                            Q[i, r - 1] = co * t1 + si * t2
                            Q[i, r] = -si * t1 + co * t2
                    for k in range(nk):
                        si = colsi[k]
                        if si != 0.0:
                            r = rhi - k
                            co = colco[k]
                            t1 = Z[i, r]
                            t2 = Z[i, r - 1]
                            Z[i, r] = co * t1 + si * t2
                            Z[i, r - 1] = -si * t1 + co * t2
            rhi = rlo - 1
