"""Pole manipulation on block Hessenberg pencils.

Two primitives drive the whole iteration: changing the poles at a boundary
of the pencil (introducing shifts) and swapping two adjacent pole blocks.
Boundary introduction computes the rational product vector

    x = gamma * prod_j (nu_j A - mu_j B)(beta_j A - alpha_j B)^{-1} e_1

restricted to the leading ``(l+1) x (l+1)`` window; the window subpencil is
itself a block Hessenberg pencil carrying exactly the poles being replaced,
and the new leading pole block of the full pencil is determined by window
data alone, so the windowed product introduces the requested poles exactly.
Conjugation-closed shifts on real pencils give a real x up to roundoff; the
imaginary residue is checked and discarded.

Swaps of blocks involving a 1x1 use the direct eigenvector construction
(norm-wise backward stable); 2x2 with 2x2 swaps solve a coupled Sylvester
equation, falling back to iterative refinement of the off-diagonal block and
rejecting the swap when the residual cannot be pushed below threshold.

Back-boundary operations are pertransposed front operations.

Internal helpers take raw arrays plus an active-segment offset so the sweep
driver can reuse them on a shrinking active region; the public operations
wrap them for whole ``BlockHessPencil`` objects.  All transforms are applied
to full rows/columns (structural zeros bound the ranges), keeping the global
equivalence (A, B) = Q^T (A0, B0) Z exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import RqzError, SingularLeadingBlock
from .pencil import (
    EPS,
    BlockHessPencil,
    ProjectivePoint,
    eig2x2_pencil,
    make_rotation,
    pertranspose,
)

__all__ = [
    "ShiftList",
    "SwapResult",
    "shift_vector_front",
    "shift_vector_back",
    "introduce_poles_front",
    "introduce_poles_back",
    "swap_blocks",
    "refine_swap22",
    "standardize_2x2",
]

# acceptance threshold for the off-diagonal block of a 2x2/2x2 swap,
# relative to the window norm
SWAP22_TOL = 20.0 * EPS


@dataclass(frozen=True)
class ShiftList:
    """A conjugation-closed list of shifts, stored by representatives.

    Real shifts appear once; complex-conjugate pairs are stored once through
    the ``alpha_im > 0`` representative and count two.  A shift equal to a
    pole it replaces merges benignly (the corresponding rational factor is
    the identity class), so distinctness is not enforced.
    """

    points: tuple[ProjectivePoint, ...]

    @staticmethod
    def from_points(points: Sequence[ProjectivePoint]) -> "ShiftList":
        """Collapse a list that may contain explicit conjugate partners."""
        reps: list[ProjectivePoint] = []
        skip = False
        for i, pt in enumerate(points):
            if skip:
                skip = False
                continue
            if pt.alpha_im == 0.0:
                reps.append(pt)
                continue
            rep = pt if pt.alpha_im > 0.0 else pt.conjugate()
            if i + 1 < len(points) and points[i + 1].alpha_im * pt.alpha_im < 0.0:
                skip = True  # absorb the adjacent explicit conjugate
            reps.append(rep)
        return ShiftList(tuple(reps))

    def blocks(self) -> list[tuple[int, ProjectivePoint]]:
        """Block structure: (1, real point) or (2, +im representative)."""
        return [(1 if p.alpha_im == 0.0 else 2, p) for p in self.points]

    @property
    def total(self) -> int:
        return sum(1 if p.alpha_im == 0.0 else 2 for p in self.points)

    def expanded(self) -> list[tuple[complex, float]]:
        """(mu, nu) pairs, conjugate partners adjacent, length ``total``."""
        out: list[tuple[complex, float]] = []
        for p in self.points:
            if p.alpha_im == 0.0:
                out.append((complex(p.alpha_re, 0.0), p.beta))
            else:
                out.append((p.alpha, p.beta))
                out.append((p.alpha.conjugate(), p.beta))
        return out


@dataclass
class SwapResult:
    status: str  # "swapped" | "rejected"
    q: Optional[np.ndarray]
    z: Optional[np.ndarray]
    refined: bool = False
    residual: float = 0.0


# ---------------------------------------------------------------------------
# small orthogonal building blocks
# ---------------------------------------------------------------------------


def _householder_to_axis(x: np.ndarray, k: int) -> np.ndarray:
    """Symmetric orthogonal H with ``H x = sigma*||x||*e_k`` (sigma = +-1)."""
    n = x.size
    nrm = float(np.linalg.norm(x))
    h = np.eye(n)
    if nrm == 0.0:
        return h
    v = np.asarray(x, dtype=np.float64).copy()
    v[k] += math.copysign(nrm, x[k]) if x[k] != 0.0 else nrm
    vn2 = float(v @ v)
    if vn2 == 0.0:
        return h
    h -= (2.0 / vn2) * np.outer(v, v)
    return h


def _orth_from_tall(x: np.ndarray) -> np.ndarray:
    """Full orthogonal factor of a tall QR; first columns span col(x)."""
    m, k = x.shape
    q = np.eye(m)
    r = np.asarray(x, dtype=np.float64).copy()
    for j in range(min(k, m - 1)):
        h = _householder_to_axis(r[j:, j], 0)
        r[j:, j:] = h @ r[j:, j:]
        q[:, j:] = q[:, j:] @ h
    return q


def _solve_complete_pivot(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Gaussian elimination with complete pivoting for tiny dense systems."""
    a = np.asarray(m, dtype=np.float64).copy()
    b = np.asarray(rhs, dtype=np.float64).copy()
    n = a.shape[0]
    col_perm = np.arange(n)
    for k in range(n):
        sub = np.abs(a[k:, k:])
        idx = int(np.argmax(sub))
        pi, pj = divmod(idx, n - k)
        pi += k
        pj += k
        if a[pi, pj] == 0.0:
            break
        if pi != k:
            a[[k, pi], :] = a[[pi, k], :]
            b[[k, pi]] = b[[pi, k]]
        if pj != k:
            a[:, [k, pj]] = a[:, [pj, k]]
            col_perm[[k, pj]] = col_perm[[pj, k]]
        piv = a[k, k]
        for i in range(k + 1, n):
            f = a[i, k] / piv
            if f != 0.0:
                a[i, k:] -= f * a[k, k:]
                b[i] -= f * b[k]
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        s = b[k] - a[k, k + 1 :] @ x[k + 1 :]
        x[k] = s / a[k, k] if a[k, k] != 0.0 else 0.0
    out = np.empty(n)
    out[col_perm] = x
    if not np.all(np.isfinite(out)):
        out[:] = 0.0
    return out


def _apply_q_rot(a, b, q, r0, co, si, col_from):
    """Rows (r0, r0+1) <- [[co, si], [-si, co]] @ rows, from col_from on."""
    for m in (a, b):
        t1 = m[r0, col_from:].copy()
        t2 = m[r0 + 1, col_from:]
        m[r0, col_from:] = co * t1 + si * t2
        m[r0 + 1, col_from:] = -si * t1 + co * t2
    if q is not None:
        t1 = q[:, r0].copy()
        q[:, r0] = co * t1 + si * q[:, r0 + 1]
        q[:, r0 + 1] = -si * t1 + co * q[:, r0 + 1]


def _apply_z_rot(a, b, z, c0, co, si, row_to):
    """Cols (c0, c0+1) <- cols @ [[co, -si], [si, co]], rows [0, row_to)."""
    for m in (a, b):
        t1 = m[:row_to, c0].copy()
        m[:row_to, c0] = co * t1 + si * m[:row_to, c0 + 1]
        m[:row_to, c0 + 1] = -si * t1 + co * m[:row_to, c0 + 1]
    if z is not None:
        t1 = z[:, c0].copy()
        z[:, c0] = co * t1 + si * z[:, c0 + 1]
        z[:, c0 + 1] = -si * t1 + co * z[:, c0 + 1]


# ---------------------------------------------------------------------------
# boundary pole introduction
# ---------------------------------------------------------------------------


def _pole_pairs(a: np.ndarray, b: np.ndarray, sizes: Sequence[int]) -> list[tuple[complex, float]]:
    """(alpha, beta) pairs of the leading pole blocks of a window pencil."""
    out: list[tuple[complex, float]] = []
    pos = 0
    for s in sizes:
        if s == 1:
            out.append((complex(a[pos + 1, pos], 0.0), float(b[pos + 1, pos])))
        elif s == 2:
            e1, e2 = eig2x2_pencil(
                a[pos + 1 : pos + 3, pos : pos + 2], b[pos + 1 : pos + 3, pos : pos + 2]
            )
            out.append((e1.alpha, e1.beta))
            out.append((e2.alpha, e2.beta))
        else:
            out.extend(_dense_block_eig_pairs(
                a[pos + 1 : pos + 1 + s, pos : pos + s], b[pos + 1 : pos + 1 + s, pos : pos + s]
            ))
        pos += s
    return out


def _dense_block_eig_pairs(a2, b2):
    from .sweep import dense_eigenvalues  # sweep depends on this module

    return [(p.alpha, p.beta) for p in dense_eigenvalues(a2, b2)]


def _rational_product_vector(aw, bw, pole_pairs, shift_pairs):
    """x = prod_j (nu_j A - mu_j B)(beta_j A - alpha_j B)^{-1} e1 on a window.

    Normalized after every factor (the free per-factor scaling).  Raises
    SingularLeadingBlock when a shifted window system is singular, which
    signals improperness to the caller.
    """
    w = aw.shape[0]
    awc = np.asarray(aw, dtype=np.complex128)
    bwc = np.asarray(bw, dtype=np.complex128)
    x = np.zeros(w, dtype=np.complex128)
    x[0] = 1.0
    for (mu, nu), (alpha, beta) in zip(shift_pairs, pole_pairs):
        c = beta * awc - alpha * bwc
        try:
            y = np.linalg.solve(c, x)
        except np.linalg.LinAlgError as exc:
            raise SingularLeadingBlock("shifted leading window is singular") from exc
        if not np.all(np.isfinite(y)):
            raise SingularLeadingBlock("shifted leading window is singular")
        x = nu * (awc @ y) - mu * (bwc @ y)
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx == 0.0:
            raise SingularLeadingBlock("rational product vector vanished")
        x /= nx
    return x


def _real_part_checked(x: np.ndarray) -> np.ndarray:
    resid = float(np.linalg.norm(x.imag))
    if resid > 1e3 * EPS * float(np.linalg.norm(x)):
        raise RqzError(
            f"shift vector has non-negligible imaginary part ({resid:.2e}); "
            "shifts not conjugation-closed?"
        )
    xr = x.real.copy()
    xr /= np.linalg.norm(xr)
    return xr


def _leading_sizes_for(part: Sequence[int], ell: int) -> list[int]:
    sizes = []
    tot = 0
    for s in part:
        if tot >= ell:
            break
        sizes.append(int(s))
        tot += int(s)
    if tot != ell:
        raise ValueError(f"l = {ell} does not align with block boundaries {tuple(part)}")
    return sizes


def _shift_vector_front_at(a, b, part, lo, shifts: ShiftList) -> np.ndarray:
    ell = shifts.total
    w = ell + 1
    sizes = _leading_sizes_for(part, ell)
    aw = a[lo : lo + w, lo : lo + w]
    bw = b[lo : lo + w, lo : lo + w]
    x = _rational_product_vector(aw, bw, _pole_pairs(aw, bw, sizes), shifts.expanded())
    return _real_part_checked(x)


def _shift_vector_back_at(a, b, part, hi, shifts: ShiftList) -> np.ndarray:
    ell = shifts.total
    w = ell + 1
    sizes = _leading_sizes_for(list(reversed(part)), ell)
    aw = pertranspose(a[hi - w : hi, hi - w : hi])
    bw = pertranspose(b[hi - w : hi, hi - w : hi])
    x = _rational_product_vector(aw, bw, _pole_pairs(aw, bw, sizes), shifts.expanded())
    return _real_part_checked(x)[::-1].copy()


def shift_vector_front(p: BlockHessPencil, shifts: ShiftList, ell: Optional[int] = None) -> np.ndarray:
    """Real unit vector whose orthogonal completion introduces ``shifts``.

    Computed by ``l`` shifted solves against the leading (l+1) x (l+1)
    window of the pencil; the imaginary residue of the internal complex
    accumulation is checked against ``1e3 * eps`` and discarded.
    """
    if ell is not None and int(ell) != shifts.total:
        raise ValueError("l must equal the total size of the shift list")
    if shifts.total + 1 > p.n:
        raise ValueError("window exceeds pencil size")
    return _shift_vector_front_at(p.a, p.b, p.partition, 0, shifts)


def shift_vector_back(p: BlockHessPencil, shifts: ShiftList, ell: Optional[int] = None) -> np.ndarray:
    """Mirror of :func:`shift_vector_front` for the trailing boundary.

    Returned in original orientation: entry ``j`` pairs with column
    ``n - l - 1 + j``.
    """
    if ell is not None and int(ell) != shifts.total:
        raise ValueError("l must equal the total size of the shift list")
    if shifts.total + 1 > p.n:
        raise ValueError("window exceeds pencil size")
    return _shift_vector_back_at(p.a, p.b, p.partition, p.n, shifts)


def _rq_restore_b_front(a, b, z, lo, ell):
    """Re-triangularize B inside a freshly introduced leading block.

    Column rotations only, so the introduced pole block keeps its
    eigenvalues; rows above the active segment are included since those
    columns extend to the top of the matrix.
    """
    hi_row = lo + ell + 1
    for r in range(lo + ell, lo + 1, -1):
        for c in range(lo, r - 1):
            if b[r, c] == 0.0:
                continue
            co, si, _ = make_rotation(b[r, c + 1], b[r, c])
            # (co, -si) sends column c's entry at row r to zero
            _apply_z_rot(a, b, z, c, co, -si, hi_row)
            b[r, c] = 0.0


def _qr_restore_b_back(a, b, q, hi, ell):
    """Row-rotation mirror of the front B restoration."""
    col_from = max(0, hi - ell - 2)
    for c in range(hi - ell - 1, hi - 1):
        for r in range(hi - 1, c + 1, -1):
            if b[r, c] == 0.0:
                continue
            co, si, _ = make_rotation(b[r - 1, c], b[r, c])
            _apply_q_rot(a, b, q, r - 1, co, si, col_from)
            b[r, c] = 0.0


def _triangularize_2x2(wa, wb, alpha: complex, beta: float):
    """Rotations (cq, sq, cz, sz) putting eigenvalue (alpha, beta) of the
    2x2 pencil first, both matrices upper triangular afterwards.

    Right-eigenvector route: the z rotation aligns e1 with the eigenvector,
    the q rotation aligns e1 with its image, zeroing the (1, 0) entry of A
    and B at once.
    """
    c = beta * wa - alpha.real * wb  # alpha is real on every call path
    r0 = abs(c[0, 0]) + abs(c[0, 1])
    r1 = abs(c[1, 0]) + abs(c[1, 1])
    if r0 >= r1:
        v = np.array([c[0, 1], -c[0, 0]])
    else:
        v = np.array([c[1, 1], -c[1, 0]])
    nv = np.linalg.norm(v)
    v = np.array([1.0, 0.0]) if nv == 0.0 else v / nv
    ua = wa @ v
    ub = wb @ v
    u = ua if np.linalg.norm(ua) >= np.linalg.norm(ub) else ub
    nu_ = np.linalg.norm(u)
    u = np.array([1.0, 0.0]) if nu_ == 0.0 else u / nu_
    return u[0], u[1], v[0], v[1]


def _split_real_block_at(a, b, q, z, pos, first_alpha: float, first_beta: float):
    """Split a 2x2 pole block at ``pos`` holding two real poles into (1, 1),
    putting the pole (first_alpha, first_beta) in front."""
    wa = a[pos + 1 : pos + 3, pos : pos + 2].copy()
    wb = b[pos + 1 : pos + 3, pos : pos + 2].copy()
    cq, sq, cz, sz = _triangularize_2x2(wa, wb, complex(first_alpha, 0.0), first_beta)
    _apply_z_rot(a, b, z, pos, cz, sz, pos + 3)
    _apply_q_rot(a, b, q, pos + 1, cq, sq, max(0, pos))
    a[pos + 2, pos] = 0.0
    b[pos + 2, pos] = 0.0


def introduce_front_at(a, b, part, lo, shifts: ShiftList, q=None, z=None, restructure=True):
    """Core of the front introduction at active-segment offset ``lo``."""
    ell = shifts.total
    w = ell + 1
    x = _shift_vector_front_at(a, b, part, lo, shifts)
    qw = _householder_to_axis(x, 0)
    a[lo : lo + w, lo:] = qw.T @ a[lo : lo + w, lo:]
    b[lo : lo + w, lo:] = qw.T @ b[lo : lo + w, lo:]
    if q is not None:
        q[:, lo : lo + w] = q[:, lo : lo + w] @ qw
    consumed = _leading_sizes_for(part, ell)
    part[: len(consumed)] = [ell]
    _rq_restore_b_front(a, b, z, lo, ell)
    if restructure:
        blocks = shifts.blocks()
        if len(blocks) == 2 and ell == 2:
            pt = blocks[0][1]
            _split_real_block_at(a, b, q, z, lo, pt.alpha_re, pt.beta)
            part[:1] = [1, 1]
        elif len(blocks) > 1:
            raise RqzError("restructuring is implemented for introductions of total size <= 2")
    return qw


def introduce_back_at(a, b, part, hi, shifts: ShiftList, q=None, z=None, restructure=True):
    """Core of the back introduction; ``hi`` is one past the segment end."""
    ell = shifts.total
    w = ell + 1
    x = _shift_vector_back_at(a, b, part, hi, shifts)
    hp = _householder_to_axis(x[::-1].copy(), 0)
    zw = hp[::-1, ::-1].copy()
    a[:hi, hi - w : hi] = a[:hi, hi - w : hi] @ zw
    b[:hi, hi - w : hi] = b[:hi, hi - w : hi] @ zw
    if z is not None:
        z[:, hi - w : hi] = z[:, hi - w : hi] @ zw
    consumed = _leading_sizes_for(list(reversed(part)), ell)
    part[len(part) - len(consumed) :] = [ell]
    _qr_restore_b_back(a, b, q, hi, ell)
    if restructure:
        blocks = shifts.blocks()
        if len(blocks) == 2 and ell == 2:
            pt = blocks[0][1]
            _split_real_block_at(a, b, q, z, hi - 3, pt.alpha_re, pt.beta)
            part[-1:] = [1, 1]
        elif len(blocks) > 1:
            raise RqzError("restructuring is implemented for introductions of total size <= 2")
    return zw


def introduce_poles_front(
    p: BlockHessPencil,
    shifts: ShiftList,
    ell: Optional[int] = None,
    q: Optional[np.ndarray] = None,
    z: Optional[np.ndarray] = None,
    restructure: bool = True,
) -> np.ndarray:
    """Replace the leading pole block(s) of total size l by ``shifts``.

    Updates the pencil as Q^T (A, B) with Q = diag(Q_{l+1}, I), restores B's
    Hessenberg shape inside the window with column rotations, and (when
    ``restructure``) splits the new leading block into the 1x1/2x2 blocks of
    the shift list, in standard form.  Returns the (l+1) x (l+1) Q window.
    """
    if ell is not None and int(ell) != shifts.total:
        raise ValueError("l must equal the total size of the shift list")
    return introduce_front_at(p.a, p.b, p.partition, 0, shifts, q, z, restructure)


def introduce_poles_back(
    p: BlockHessPencil,
    shifts: ShiftList,
    ell: Optional[int] = None,
    q: Optional[np.ndarray] = None,
    z: Optional[np.ndarray] = None,
    restructure: bool = True,
) -> np.ndarray:
    """Mirror of :func:`introduce_poles_front` at the trailing boundary.

    Updates the pencil as (A, B) Z with Z = diag(I, Z_{l+1}) and returns the
    Z window.
    """
    if ell is not None and int(ell) != shifts.total:
        raise ValueError("l must equal the total size of the shift list")
    return introduce_back_at(p.a, p.b, p.partition, p.n, shifts, q, z, restructure)


# ---------------------------------------------------------------------------
# swapping adjacent pole blocks
# ---------------------------------------------------------------------------


def _swap_window_11(wa, wb):
    alpha2, beta2 = wa[1, 1], wb[1, 1]
    xc = beta2 * wa[0, 0] - alpha2 * wb[0, 0]
    yc = beta2 * wa[0, 1] - alpha2 * wb[0, 1]
    v = np.array([-yc, xc])
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return np.eye(2), np.eye(2)
    v /= nv
    ua = wa @ v
    ub = wb @ v
    u = ua if np.linalg.norm(ua) >= np.linalg.norm(ub) else ub
    nu_ = np.linalg.norm(u)
    if nu_ == 0.0:
        return np.eye(2), np.eye(2)
    u /= nu_
    qw = np.array([[u[0], -u[1]], [u[1], u[0]]])
    zw = np.array([[v[0], -v[1]], [v[1], v[0]]])
    return qw, zw


def _swap_window_21(wa, wb):
    """(2, 1) -> (1, 2): bring the trailing real pole to the front."""
    alpha2, beta2 = wa[2, 2], wb[2, 2]
    c = beta2 * wa - alpha2 * wb
    c11 = c[0:2, 0:2]
    if float(np.max(np.abs(c11))) == 0.0:
        v = np.array([1.0, 0.0, 0.0])
    else:
        v12 = _solve_complete_pivot(c11, -c[0:2, 2])
        v = np.array([v12[0], v12[1], 1.0])
        v /= np.linalg.norm(v)
    zw = _householder_to_axis(v, 0)
    ua = wa @ v
    ub = wb @ v
    u = ua if np.linalg.norm(ua) >= np.linalg.norm(ub) else ub
    qw = _householder_to_axis(u, 0)
    return qw, zw


def _deflating_directions_12(wa, wb):
    """Right deflating 2-space of the trailing 2x2 block of a (1,2) window."""
    e1, e2 = eig2x2_pencil(wa[1:3, 1:3], wb[1:3, 1:3])
    cols = []
    for ev in ((e1,) if e1.alpha_im > 0.0 else (e1, e2)):
        alpha, beta = ev.alpha, complex(ev.beta)
        c = beta * wa.astype(np.complex128) - alpha * wb.astype(np.complex128)
        c22 = c[1:3, 1:3]
        r0 = abs(c22[0, 0]) + abs(c22[0, 1])
        r1 = abs(c22[1, 0]) + abs(c22[1, 1])
        n2 = np.array([c22[0, 1], -c22[0, 0]]) if r0 >= r1 else np.array([c22[1, 1], -c22[1, 0]])
        if np.linalg.norm(n2) == 0.0:
            n2 = np.array([1.0 + 0.0j, 0.0j])
        denom = c[0, 0]
        v1 = -(c[0, 1] * n2[0] + c[0, 2] * n2[1]) / denom if denom != 0.0 else 0.0j
        v = np.array([v1, n2[0], n2[1]])
        if ev.alpha_im > 0.0:
            cols.append(v.real)
            cols.append(v.imag)
        else:
            cols.append(v.real)
    return np.column_stack(cols[:2])


def _normal_direction(vmat):
    w = np.cross(vmat[:, 0], vmat[:, 1])
    nw = np.linalg.norm(w)
    if nw == 0.0:
        return _orth_from_tall(vmat)[:, 2]
    return w / nw


def _swap_window_12(wa, wb):
    """(1, 2) -> (2, 1): bring the trailing complex pair to the front."""
    vmat = _deflating_directions_12(wa, wb)
    zw = _householder_to_axis(_normal_direction(vmat), 2)
    ua = wa @ vmat
    ub = wb @ vmat
    wu_a = np.cross(ua[:, 0], ua[:, 1])
    wu_b = np.cross(ub[:, 0], ub[:, 1])
    if np.linalg.norm(wu_a) >= np.linalg.norm(wu_b):
        wu, img = wu_a, ua
    else:
        wu, img = wu_b, ub
    nwu = np.linalg.norm(wu)
    wu = _orth_from_tall(img)[:, 2] if nwu == 0.0 else wu / nwu
    qw = _householder_to_axis(wu, 2)
    return qw, zw


def _sylvester_22(a11, a22, a12, b11, b22, b12):
    """Solve A11 L - R A22 = A12, B11 L - R B22 = B12 (all 2x2 blocks)."""
    eye2 = np.eye(2)
    m = np.zeros((8, 8))
    m[0:4, 0:4] = np.kron(eye2, a11)
    m[0:4, 4:8] = -np.kron(a22.T, eye2)
    m[4:8, 0:4] = np.kron(eye2, b11)
    m[4:8, 4:8] = -np.kron(b22.T, eye2)
    rhs = np.concatenate([a12.flatten(order="F"), b12.flatten(order="F")])
    sol = _solve_complete_pivot(m, rhs)
    ell = sol[0:4].reshape((2, 2), order="F")
    r = sol[4:8].reshape((2, 2), order="F")
    return ell, r


def _offdiag_residual(wa, wb, qw, zw, s2):
    wa2 = qw.T @ wa @ zw
    wb2 = qw.T @ wb @ zw
    ea = np.linalg.norm(wa2[s2:, :s2])
    eb = np.linalg.norm(wb2[s2:, :s2])
    na = np.linalg.norm(wa)
    nb = np.linalg.norm(wb)
    return max(ea / na if na > 0 else ea, eb / nb if nb > 0 else eb)


def refine_swap22(wa, wb, qw, zw, max_iter: int = 3):
    """Iteratively shrink the off-diagonal block of a tentative 2x2/2x2 swap.

    Each pass solves the linearized coupled Sylvester equations on the
    residual-perturbed (transformed) window and composes the orthogonal
    corrections; a step that fails to decrease the residual is discarded, so
    the returned residual is non-increasing.  Returns
    ``(qw, zw, residual, iterations_used)``.
    """
    best = _offdiag_residual(wa, wb, qw, zw, 2)
    used = 0
    for _ in range(max_iter):
        if best <= SWAP22_TOL:
            break
        wa2 = qw.T @ wa @ zw
        wb2 = qw.T @ wb @ zw
        ea = wa2[2:4, 0:2]
        eb = wb2[2:4, 0:2]
        kz, kq = _sylvester_22(
            wa2[2:4, 2:4], wa2[0:2, 0:2], -ea, wb2[2:4, 2:4], wb2[0:2, 0:2], -eb
        )
        qc = _orth_from_tall(np.vstack([np.eye(2), kq]))
        zc = _orth_from_tall(np.vstack([np.eye(2), kz]))
        q2 = qw @ qc
        z2 = zw @ zc
        res2 = _offdiag_residual(wa, wb, q2, z2, 2)
        if res2 >= best:
            break
        qw, zw, best = q2, z2, res2
        used += 1
    return qw, zw, best, used


def _swap_window_22(wa, wb):
    """(2, 2) swap via the coupled Sylvester route; may reject."""
    ell, r = _sylvester_22(
        wa[0:2, 0:2], wa[2:4, 2:4], wa[0:2, 2:4], wb[0:2, 0:2], wb[2:4, 2:4], wb[0:2, 2:4]
    )
    zw = _orth_from_tall(np.vstack([-ell, np.eye(2)]))
    qw = _orth_from_tall(np.vstack([-r, np.eye(2)]))
    res = _offdiag_residual(wa, wb, qw, zw, 2)
    refined = res > SWAP22_TOL
    used = 0
    if refined:
        qw, zw, res, used = refine_swap22(wa, wb, qw, zw)
    return qw, zw, res <= SWAP22_TOL, refined, res


def swap_window_kernel(wa, wb, s1: int, s2: int):
    """Window transforms exchanging adjacent pole blocks of sizes s1, s2.

    The window is the (s1+s2) x (s1+s2) diagonal part of the pole pencil,
    block upper triangular on entry.  Returns ``(qw, zw, ok, refined,
    residual)``; ``ok`` is False only for a rejected 2x2/2x2 swap.
    """
    if (s1, s2) == (1, 1):
        qw, zw = _swap_window_11(wa, wb)
        return qw, zw, True, False, 0.0
    if (s1, s2) == (2, 1):
        qw, zw = _swap_window_21(wa, wb)
        return qw, zw, True, False, 0.0
    if (s1, s2) == (1, 2):
        qw, zw = _swap_window_12(wa, wb)
        return qw, zw, True, False, 0.0
    if (s1, s2) == (2, 2):
        return _swap_window_22(wa, wb)
    raise ValueError(f"unsupported block sizes ({s1}, {s2})")


def _standardize_block_at(a, b, z, pos, row_to):
    """Zero B[pos+2, pos] of the 2x2 block at ``pos`` with one column
    rotation; the block's eigenvalues are unchanged."""
    if b[pos + 2, pos] != 0.0:
        co, si, _ = make_rotation(b[pos + 2, pos + 1], b[pos + 2, pos])
        _apply_z_rot(a, b, z, pos, co, -si, row_to)
        b[pos + 2, pos] = 0.0


def apply_swap(a, b, part, lo, bidx, q=None, z=None) -> SwapResult:
    """Swap pole blocks ``bidx`` and ``bidx+1`` of the active partition.

    Transforms are applied to full rows/columns of (A, B) and accumulated
    into q, z when given.  On rejection everything is left bitwise
    unchanged.
    """
    s1 = int(part[bidx])
    s2 = int(part[bidx + 1])
    pos = lo + sum(part[:bidx])
    s = s1 + s2
    wa = a[pos + 1 : pos + 1 + s, pos : pos + s].copy()
    wb = b[pos + 1 : pos + 1 + s, pos : pos + s].copy()
    qw, zw, ok, refined, res = swap_window_kernel(wa, wb, s1, s2)
    if not ok:
        return SwapResult("rejected", None, None, refined, res)
    a[pos + 1 : pos + 1 + s, pos:] = qw.T @ a[pos + 1 : pos + 1 + s, pos:]
    b[pos + 1 : pos + 1 + s, pos:] = qw.T @ b[pos + 1 : pos + 1 + s, pos:]
    a[: pos + 1 + s, pos : pos + s] = a[: pos + 1 + s, pos : pos + s] @ zw
    b[: pos + 1 + s, pos : pos + s] = b[: pos + 1 + s, pos : pos + s] @ zw
    if q is not None:
        q[:, pos + 1 : pos + 1 + s] = q[:, pos + 1 : pos + 1 + s] @ qw
    if z is not None:
        z[:, pos : pos + s] = z[:, pos : pos + s] @ zw
    part[bidx], part[bidx + 1] = s2, s1
    # exact structural zeros of the swapped window; intra-block B entries are
    # O(1) and must be removed by the standardization rotations instead
    a[pos + 1 + s2 : pos + 1 + s, pos : pos + s2] = 0.0
    b[pos + 1 + s2 : pos + 1 + s, pos : pos + s2] = 0.0
    if s2 == 2:
        _standardize_block_at(a, b, z, pos, pos + 1 + s)
    if s1 == 2:
        _standardize_block_at(a, b, z, pos + s2, pos + 1 + s)
    return SwapResult("swapped", qw, zw, refined, res)


def swap_blocks(p: BlockHessPencil, i: int, q=None, z=None) -> SwapResult:
    """Swap adjacent pole blocks i and i+1 of a pencil (public wrapper)."""
    if i < 0 or i + 1 >= len(p.partition):
        raise IndexError("block index out of range")
    return apply_swap(p.a, p.b, p.partition, 0, i, q, z)


def standardize_2x2(p: BlockHessPencil, block_index: int, z=None) -> None:
    """Restore the standard form (triangular B part) of a 2x2 pole block."""
    if p.partition[block_index] != 2:
        raise ValueError("block is not 2x2")
    pos = sum(p.partition[:block_index])
    _standardize_block_at(p.a, p.b, z, pos, pos + 3)
