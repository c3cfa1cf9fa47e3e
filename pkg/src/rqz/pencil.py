"""Core data types for matrix pencils in block Hessenberg form.

A pencil is the one-parameter family ``beta*A - alpha*B`` of two real square
matrices.  The solver keeps the pair in *block Hessenberg* form: both matrices
have exact zeros below a shared block subdiagonal described by a partition
vector whose entries sum to ``n - 1``.  The subpencil under the first row and
left of the last column (``A[1:, :-1]``, ``B[1:, :-1]``) is the *pole pencil*;
its block-wise eigenvalues are the poles of the iteration.

Eigenvalues, poles and shifts are represented projectively as
``(alpha_re, alpha_im, beta)`` with ``lambda = alpha/beta`` so that the point
at infinity (``beta = 0``) needs no special casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SingularPencil, SingularPoleBlock

EPS = float(np.finfo(np.float64).eps)

__all__ = [
    "EPS",
    "ProjectivePoint",
    "MatrixPair",
    "PartitionVector",
    "PoleBlock",
    "BlockHessPencil",
    "SchurResult",
    "StructureReport",
    "make_rotation",
    "eig2x2_pencil",
    "cumulative_partition",
    "validate_structure",
    "pole_tuple",
    "pertranspose",
]


@dataclass(frozen=True)
class ProjectivePoint:
    """A point ``alpha/beta`` of the extended complex plane.

    Stored as a unit 3-vector ``(alpha_re, alpha_im, beta)`` with
    ``beta >= 0``; ``beta = 0`` encodes the point at infinity.  Use
    :meth:`from_value` / :meth:`normalized` rather than the raw constructor
    so the invariants hold.
    """

    alpha_re: float
    alpha_im: float
    beta: float

    @staticmethod
    def normalized(alpha_re: float, alpha_im: float, beta: float) -> "ProjectivePoint":
        """Canonical representative: unit norm, ``beta >= 0``, fixed signs.

        For ``beta = 0`` the representative with ``alpha_re >= 0`` is chosen
        (and ``alpha_im > 0`` if ``alpha_re = 0``) so equal projective points
        compare equal.
        """
        nrm = math.sqrt(alpha_re * alpha_re + alpha_im * alpha_im + beta * beta)
        if nrm == 0.0 or not math.isfinite(nrm):
            raise SingularPencil("projective point must have a nonzero finite representative")
        ar, ai, b = alpha_re / nrm, alpha_im / nrm, beta / nrm
        if b < 0.0 or (b == 0.0 and (ar < 0.0 or (ar == 0.0 and ai < 0.0))):
            ar, ai, b = -ar, -ai, -b
        return ProjectivePoint(ar, ai, b)

    @staticmethod
    def from_pair(alpha: complex, beta: complex) -> "ProjectivePoint":
        """Build from a general complex ``(alpha, beta)`` pair.

        The pair is rotated by a unit phase so beta becomes real nonnegative,
        which is always possible for the conjugation-closed spectra handled
        here.
        """
        b = complex(beta)
        a = complex(alpha)
        if b != 0:
            a *= b.conjugate() / abs(b)
            return ProjectivePoint.normalized(a.real, a.imag, abs(b))
        return ProjectivePoint.normalized(a.real, a.imag, 0.0)

    @staticmethod
    def from_value(value: complex) -> "ProjectivePoint":
        v = complex(value)
        return ProjectivePoint.normalized(v.real, v.imag, 1.0)

    @staticmethod
    def infinity() -> "ProjectivePoint":
        return ProjectivePoint(1.0, 0.0, 0.0)

    @property
    def is_infinite(self) -> bool:
        return self.beta == 0.0

    @property
    def is_real(self) -> bool:
        return self.alpha_im == 0.0

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    def value(self) -> complex:
        """``alpha/beta``; returns ``inf`` for the point at infinity."""
        if self.beta == 0.0:
            return complex(math.inf, 0.0)
        return self.alpha / self.beta

    def conjugate(self) -> "ProjectivePoint":
        return ProjectivePoint(self.alpha_re, -self.alpha_im, self.beta)


def make_rotation(x: float, y: float) -> tuple[float, float, float]:
    """Plane rotation ``[[c, s], [-s, c]] @ [x, y] = [r, 0]`` with ``r >= 0``.

    Computed without overflow; ``(0, 0)`` yields the identity rotation.
    """
    if y == 0.0:
        if x >= 0.0:
            return 1.0, 0.0, x
        return -1.0, -0.0, -x
    if x == 0.0:
        return 0.0, math.copysign(1.0, y), abs(y)
    r = math.hypot(x, y)
    return x / r, y / r, r


def cumulative_partition(sizes: Sequence[int]) -> tuple[int, ...]:
    """Running sums ``(s1, s1+s2, ..., n-1)`` of a partition vector."""
    out = []
    tot = 0
    for s in sizes:
        tot += int(s)
        out.append(tot)
    return tuple(out)


@dataclass(frozen=True)
class PartitionVector:
    """Block sizes of the pole pencil; entries sum to ``n - 1``."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if not self.sizes or any(int(s) <= 0 for s in self.sizes):
            raise ValueError("partition entries must be positive")
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def cumulative(self) -> tuple[int, ...]:
        return cumulative_partition(self.sizes)


@dataclass(frozen=True)
class MatrixPair:
    """A dense real pair (A, B) defining the pencil ``beta*A - alpha*B``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("A must be square")
        if b.shape != a.shape:
            raise ValueError("A and B must have equal shape")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def copy(self) -> "MatrixPair":
        return MatrixPair(self.a.copy(), self.b.copy())


@dataclass(frozen=True)
class PoleBlock:
    """One block of the pole tuple.

    ``size == 1`` holds a real pole; ``size == 2`` holds a complex-conjugate
    pair stored once through its representative with ``alpha_im > 0``.
    """

    size: int
    point: ProjectivePoint

    def __post_init__(self):
        if self.size not in (1, 2):
            raise ValueError("pole blocks have size 1 or 2")
        if self.size == 1 and self.point.alpha_im != 0.0:
            raise ValueError("size-1 pole block must hold a real pole")
        if self.size == 2 and self.point.alpha_im <= 0.0:
            raise ValueError("size-2 pole block stores the alpha_im > 0 representative")

    def points(self) -> list[ProjectivePoint]:
        if self.size == 1:
            return [self.point]
        return [self.point, self.point.conjugate()]


@dataclass
class BlockHessPencil:
    """A matrix pair in block Hessenberg form with its partition.

    Structural zeros are exact: entries of A below the block subdiagonal and
    entries of B below the first subdiagonal are bitwise zero at all times
    (2x2 blocks are kept in the standard form with an upper triangular B
    part, so B stays upper Hessenberg throughout).
    """

    pair: MatrixPair
    partition: list[int]
    b_is_hessenberg: bool = True

    def __post_init__(self):
        self.partition = [int(s) for s in self.partition]
        if sum(self.partition) != self.pair.n - 1:
            raise ValueError("partition must sum to n - 1")
        if any(s <= 0 for s in self.partition):
            raise ValueError("partition entries must be positive")

    @property
    def a(self) -> np.ndarray:
        return self.pair.a

    @property
    def b(self) -> np.ndarray:
        return self.pair.b

    @property
    def n(self) -> int:
        return self.pair.n

    def cumulative(self) -> tuple[int, ...]:
        return cumulative_partition(self.partition)

    def copy(self) -> "BlockHessPencil":
        return BlockHessPencil(self.pair.copy(), list(self.partition), self.b_is_hessenberg)


@dataclass(frozen=True)
class StructureReport:
    """Outcome of a structural-zero check; ``index`` is the first violation."""

    ok: bool
    matrix: Optional[str] = None
    index: Optional[tuple[int, int]] = None


def _block_starts(partition: Sequence[int]) -> list[int]:
    starts = [0]
    for s in partition[:-1]:
        starts.append(starts[-1] + int(s))
    return starts


def validate_structure(p: BlockHessPencil) -> StructureReport:
    """Check the exact structural zeros of a block Hessenberg pencil.

    Scans column-major and reports the first nonzero entry found below the
    block subdiagonal of A or below the first subdiagonal of B (Matrix B must
    be upper Hessenberg in standard form).  Zeros are required bitwise, not
    merely small.
    """
    a, b, n = p.a, p.b, p.n
    if sum(p.partition) != n - 1:
        return StructureReport(False, "partition", None)
    ends = cumulative_partition(p.partition)
    # first row allowed to be dense; row r >= 1 may be nonzero from the start
    # of the block containing subdiagonal position r - 1
    lo_for_row = np.empty(n, dtype=np.int64)
    lo_for_row[0] = 0
    start = 0
    bi = 0
    for r in range(1, n):
        if r - 1 >= ends[bi]:
            start = ends[bi]
            bi += 1
        lo_for_row[r] = start
    for c in range(n - 1):
        col = a[:, c]
        for r in range(c + 1, n):
            if lo_for_row[r] > c and col[r] != 0.0:
                return StructureReport(False, "a", (r, c))
        colb = b[:, c]
        for r in range(c + 2, n):
            if colb[r] != 0.0:
                return StructureReport(False, "b", (r, c))
    return StructureReport(True)


def eig2x2_pencil(a: np.ndarray, b: np.ndarray) -> tuple[ProjectivePoint, ProjectivePoint]:
    """Generalized eigenvalues of a regular real 2x2 pencil.

    Solves the characteristic quadratic ``det(b) l^2 - t l + det(a)`` in
    projective form with max-entry prescaling.  A complex pair is returned
    with the positive-imaginary representative first.

    Raises
    ------
    SingularPencil
        If ``det(beta*a - alpha*b)`` vanishes identically.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sa = float(np.max(np.abs(a)))
    sb = float(np.max(np.abs(b)))
    sa = sa if sa > 0.0 else 1.0
    sb = sb if sb > 0.0 else 1.0
    a00, a01, a10, a11 = a[0, 0] / sa, a[0, 1] / sa, a[1, 0] / sa, a[1, 1] / sa
    b00, b01, b10, b11 = b[0, 0] / sb, b[0, 1] / sb, b[1, 0] / sb, b[1, 1] / sb
    det_a = a00 * a11 - a01 * a10
    det_b = b00 * b11 - b01 * b10
    t = a00 * b11 + a11 * b00 - a01 * b10 - a10 * b01
    if max(abs(det_a), abs(det_b), abs(t)) < 1e3 * EPS:
        raise SingularPencil("2x2 pencil is numerically singular")
    disc = t * t - 4.0 * det_a * det_b
    # original-scale pair: (alpha, beta) = (alpha'/sb, beta'/sa)
    if disc >= 0.0:
        root = math.sqrt(disc)
        q = 0.5 * (t + math.copysign(root, t)) if t != 0.0 else 0.5 * root
        if q == 0.0:
            # t = 0 and det_a*det_b = 0: a double root at 0 or at infinity
            if det_a == 0.0:
                pt = ProjectivePoint.normalized(0.0, 0.0, 1.0)
            else:
                pt = ProjectivePoint.infinity()
            return pt, pt
        p1 = ProjectivePoint.normalized(q / sb, 0.0, det_b / sa)
        p2 = ProjectivePoint.normalized(det_a / sb, 0.0, q / sa)
        return p1, p2
    im = 0.5 * math.sqrt(-disc)
    re = 0.5 * t
    beta = det_b
    if beta < 0.0:
        re, im, beta = -re, im, -beta  # conjugate + sign flip keeps +im first
    p1 = ProjectivePoint.normalized(re / sb, im / sb, beta / sa)
    p2 = p1.conjugate()
    return p1, p2


def pole_tuple(p: BlockHessPencil) -> list[PoleBlock]:
    """Poles of the pencil, block by block.

    Size-1 blocks give the subdiagonal ratio ``a[i+1, i] / b[i+1, i]``;
    size-2 blocks give the conjugate eigenvalue pair of the 2x2 subpencil.

    Raises
    ------
    SingularPoleBlock
        If a block is singular as a pencil.
    """
    a, b = p.a, p.b
    out = []
    pos = 0
    for s in p.partition:
        if s == 1:
            x, y = a[pos + 1, pos], b[pos + 1, pos]
            if x == 0.0 and y == 0.0:
                raise SingularPoleBlock(f"zero 1x1 pole block at position {pos}")
            out.append(PoleBlock(1, ProjectivePoint.normalized(x, 0.0, y)))
        elif s == 2:
            wa = a[pos + 1 : pos + 3, pos : pos + 2]
            wb = b[pos + 1 : pos + 3, pos : pos + 2]
            try:
                e1, e2 = eig2x2_pencil(wa, wb)
            except SingularPencil as exc:
                raise SingularPoleBlock(f"singular 2x2 pole block at position {pos}") from exc
            if e1.alpha_im > 0.0:
                out.append(PoleBlock(2, e1))
            else:
                # a 2x2 block holding two real poles is outside the standard
                # form; report them as two size-1 entries is not possible, so
                # surface the representative pair through the first value
                raise SingularPoleBlock(
                    f"2x2 pole block at position {pos} has real eigenvalues; not in standard form"
                )
        else:
            raise SingularPoleBlock(f"pole blocks of size {s} are not representable")
        pos += s
    return out


@dataclass
class SchurResult:
    """Real generalized Schur decomposition ``(S, T) = Q^T (A, B) Z``.

    S is quasi upper triangular with 1x1 and 2x2 diagonal blocks, T upper
    triangular; every 2x2 diagonal block carries a complex-conjugate
    eigenvalue pair.  ``eigenvalues`` lists the n eigenvalues in diagonal
    order with conjugate partners adjacent.
    """

    s: np.ndarray
    t: np.ndarray
    q: np.ndarray
    z: np.ndarray
    eigenvalues: list[ProjectivePoint]
    stats: object = field(default=None, repr=False)


def pertranspose(m: np.ndarray) -> np.ndarray:
    """Transpose along the anti-diagonal: ``J M^T J`` with J the flip."""
    return np.ascontiguousarray(m[::-1, ::-1].T)
