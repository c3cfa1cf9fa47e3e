"""Reduction of a dense pair to Hessenberg-triangular form.

This is the all-infinite-pole starting configuration of the rational
iteration: B upper triangular with nonnegative diagonal, A upper Hessenberg,
partition (1, ..., 1).
"""

from __future__ import annotations

import numpy as np

from ._kernels import hess_tri_kernel
from .pencil import BlockHessPencil, MatrixPair

__all__ = ["qr_triangularize_b", "hess_tri_reduce", "reduce_to_hess_tri"]


_QR_NB = 32


def qr_triangularize_b(pair: MatrixPair, want_q: bool = True):
    """Householder QR of B, applied to the pair from the left.

    Blocked compact-WY reflectors (panels of 32) so the trailing updates of
    B, A and Q run as matrix-matrix products.  Returns ``(MatrixPair, q)``
    with ``q^T B`` upper triangular with nonnegative diagonal and A updated
    by the same transformation.
    """
    a = pair.a.copy()
    b = pair.b.copy()
    n = pair.n
    q = np.eye(n) if want_q else None
    for k0 in range(0, n - 1, _QR_NB):
        k1 = min(k0 + _QR_NB, n)
        nb = k1 - k0
        m = n - k0
        v_panel = np.zeros((m, nb))
        taus = np.zeros(nb)
        for j in range(nb):
            kj = k0 + j
            x = b[kj:, kj]
            sigma = float(x[1:] @ x[1:]) if x.size > 1 else 0.0
            x0 = float(x[0])
            if sigma == 0.0:
                taus[j] = 0.0
                v_panel[j, j] = 1.0
                continue
            mu = np.sqrt(x0 * x0 + sigma)
            v0 = x0 + mu if x0 >= 0.0 else x0 - mu
            tau = 2.0 * v0 * v0 / (sigma + v0 * v0)
            v = np.empty(m - j)
            v[0] = 1.0
            v[1:] = x[1:] / v0
            # apply the reflector to the rest of the panel columns
            w = v @ b[kj:, kj:k1]
            b[kj:, kj:k1] -= tau * np.outer(v, w)
            b[kj + 1 :, kj] = 0.0
            v_panel[j:, j] = v
            taus[j] = tau
        # compact WY: H1 H2 ... Hnb = I - V T V^T
        t_mat = np.zeros((nb, nb))
        for j in range(nb):
            if taus[j] == 0.0:
                continue
            if j > 0:
                tmp = v_panel[:, :j].T @ v_panel[:, j]
                t_mat[:j, j] = -taus[j] * (t_mat[:j, :j] @ tmp)
            t_mat[j, j] = taus[j]
        # trailing updates: rows k0.. of B (cols k1..) and all of A; Q cols
        w = v_panel.T @ b[k0:, k1:]
        b[k0:, k1:] -= v_panel @ (t_mat.T @ w)
        w = v_panel.T @ a[k0:, :]
        a[k0:, :] -= v_panel @ (t_mat.T @ w)
        if want_q:
            w = q[:, k0:] @ v_panel
            q[:, k0:] -= (w @ t_mat) @ v_panel.T
    # deterministic sign convention: nonnegative diagonal of B
    for k in range(n):
        if b[k, k] < 0.0:
            b[k, k:] = -b[k, k:]
            a[k, :] = -a[k, :]
            if want_q:
                q[:, k] = -q[:, k]
    return MatrixPair(a, b), q


def hess_tri_reduce(pair: MatrixPair, want_qz: bool = True):
    """Rotation-based reduction of (A, B), B triangular, to Hessenberg form.

    Interleaved row/column Givens rotations zero A below its first
    subdiagonal while keeping B upper triangular.  Returns a
    ``BlockHessPencil`` with partition (1, ..., 1) (all poles infinite when B
    came in strictly triangular) and the accumulated orthogonal factors.
    """
    a = pair.a.copy()
    b = pair.b.copy()
    n = pair.n
    q = np.eye(n)
    z = np.eye(n)
    if n > 2:
        hess_tri_kernel(a, b, q, z, want_qz)
    pencil = BlockHessPencil(MatrixPair(a, b), [1] * (n - 1))
    return pencil, q, z


def reduce_to_hess_tri(pair: MatrixPair, want_qz: bool = True):
    """Full preprocessing: triangularize B, then Hessenberg-reduce A."""
    tri, q0 = qr_triangularize_b(pair, want_q=want_qz)
    pencil, q1, z = hess_tri_reduce(tri, want_qz=want_qz)
    q = q0 @ q1 if want_qz else None
    return pencil, q, (z if want_qz else None)
