"""Row vectors, matrices and bilinear/quadratic forms over GF(q).

Vectors are plain tuples of field codes and act on the right of
matrices: the image of v under M is v @ M.  Consequently M1 * M2 means
"apply M1, then M2".

Two forms are provided: the alternating form

    beta(x, y) = x1*y4 - y1*x4 + x2*y3 - y2*x3

on 4-dimensional space, whose totally isotropic subspaces give the
symplectic quadrangle, and an elliptic quadratic form

    Q(x) = x1*x2 + x3*x4 + x5^2 + x5*x6 + d*x6^2

on 6-dimensional space (d making t^2 + t + d irreducible), whose
singular subspaces give the elliptic quadric quadrangle.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

import numpy as np

from .gf import GF

__all__ = [
    "Mat",
    "SemilinearMap",
    "Subspace",
    "AlternatingForm",
    "QuadraticForm",
    "DimensionMismatchError",
    "rref",
    "normalise_point",
    "projective_points",
    "enumerate_singular",
    "sp4_membership",
    "mat_mul_batch",
    "mat_identity_mask",
]


class DimensionMismatchError(ValueError):
    """Operand shapes are incompatible."""


Vec = tuple  # tuple of field codes


def _check_vec(field: GF, v: Sequence[int], n: int) -> tuple:
    v = tuple(v)
    if len(v) != n:
        raise DimensionMismatchError(f"expected length {n}, got {len(v)}")
    return v


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class Mat:
    """Immutable matrix over a GF instance, row-major code tuple."""

    __slots__ = ("field", "rows", "cols", "data", "_hash")

    def __init__(self, field: GF, rows: int, cols: int,
                 data: Sequence[int]):
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data = tuple(data)
        if len(self.data) != rows * cols:
            raise DimensionMismatchError("data length != rows*cols")
        self._hash = None

    @classmethod
    def from_rows(cls, field: GF, rows: Sequence[Sequence[int]]) -> "Mat":
        r = len(rows)
        c = len(rows[0])
        flat = []
        for row in rows:
            if len(row) != c:
                raise DimensionMismatchError("ragged rows")
            flat.extend(row)
        return cls(field, r, c, flat)

    @classmethod
    def identity(cls, field: GF, n: int) -> "Mat":
        data = [0] * (n * n)
        for i in range(n):
            data[i * n + i] = 1
        return cls(field, n, n, data)

    def row(self, i: int) -> tuple:
        return self.data[i * self.cols:(i + 1) * self.cols]

    def as_rows(self) -> list[tuple]:
        return [self.row(i) for i in range(self.rows)]

    def entry(self, i: int, j: int) -> int:
        return self.data[i * self.cols + j]

    def __mul__(self, other: "Mat") -> "Mat":
        if not isinstance(other, Mat):
            return NotImplemented
        if self.cols != other.rows or self.field is not other.field:
            raise DimensionMismatchError("incompatible matrix product")
        add, mul, _, _ = self.field.scalar_tables()
        n, k, m = self.rows, self.cols, other.cols
        a, b = self.data, other.data
        out = [0] * (n * m)
        for i in range(n):
            arow = a[i * k:(i + 1) * k]
            for j in range(m):
                acc = 0
                for t in range(k):
                    x = arow[t]
                    if x:
                        acc = add[acc][mul[x][b[t * m + j]]]
                out[i * m + j] = acc
        return Mat(self.field, n, m, out)

    def apply(self, v: Sequence[int]) -> tuple:
        """Image of the row vector v under this matrix (v @ M)."""
        v = _check_vec(self.field, v, self.rows)
        add, mul, _, _ = self.field.scalar_tables()
        m = self.cols
        out = [0] * m
        for i, x in enumerate(v):
            if x:
                mx = mul[x]
                roff = i * m
                for j in range(m):
                    y = self.data[roff + j]
                    if y:
                        out[j] = add[out[j]][mx[y]]
        return tuple(out)

    def transpose(self) -> "Mat":
        r, c = self.rows, self.cols
        return Mat(self.field, c, r,
                   [self.data[i * c + j] for j in range(c) for i in range(r)])

    def scale(self, c: int) -> "Mat":
        _, mul, _, _ = self.field.scalar_tables()
        return Mat(self.field, self.rows, self.cols,
                   [mul[c][x] for x in self.data])

    def map_entries(self, fn) -> "Mat":
        return Mat(self.field, self.rows, self.cols,
                   [fn(x) for x in self.data])

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise DimensionMismatchError("only square matrices invert")
        n = self.rows
        k = self.field
        add, mul, neg, inv = k.scalar_tables()
        aug = [list(self.row(i)) + [1 if j == i else 0 for j in range(n)]
               for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r][col]), None)
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            s = inv[aug[col][col]]
            aug[col] = [mul[s][x] for x in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    c = aug[r][col]
                    aug[r] = [add[x][mul[neg[c]][y]]
                              for x, y in zip(aug[r], aug[col])]
        return Mat(k, n, n, [x for row in aug for x in row[n:]])

    def __pow__(self, e: int) -> "Mat":
        if self.rows != self.cols:
            raise DimensionMismatchError("only square matrices power")
        base = self if e >= 0 else self.inverse()
        e = abs(e)
        out = Mat.identity(self.field, self.rows)
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def is_identity(self) -> bool:
        n = self.cols
        return self.rows == n and all(
            x == (1 if i // n == i % n else 0)
            for i, x in enumerate(self.data))

    def to_array(self) -> np.ndarray:
        return np.asarray(self.data, dtype=np.int64).reshape(
            self.rows, self.cols)

    def __eq__(self, other):
        return (isinstance(other, Mat) and self.field == other.field
                and self.rows == other.rows and self.cols == other.cols
                and self.data == other.data)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.q, self.rows, self.data))
        return self._hash

    def __repr__(self):
        body = "; ".join(",".join(map(str, self.row(i)))
                         for i in range(self.rows))
        return f"Mat({self.field.q})[{body}]"


class SemilinearMap:
    """x -> (x^(p^e)) @ M: a field automorphism then an invertible matrix.

    Products compose left to right like matrices: (A,d)*(B,e) first
    applies (A,d), then (B,e), which works out to (A^(p^e) B, d+e).
    """

    __slots__ = ("mat", "frob", "_hash")

    def __init__(self, mat: Mat, frob: int = 0):
        self.mat = mat
        self.frob = frob % mat.field.f
        self._hash = None

    def apply(self, v: Sequence[int]) -> tuple:
        k = self.mat.field
        if self.frob:
            v = tuple(k.frob(x, self.frob) for x in v)
        return self.mat.apply(v)

    def __mul__(self, other: "SemilinearMap") -> "SemilinearMap":
        if not isinstance(other, SemilinearMap):
            return NotImplemented
        k = self.mat.field
        e = other.frob
        m1 = self.mat if not e else self.mat.map_entries(
            lambda x: k.frob(x, e))
        return SemilinearMap(m1 * other.mat, self.frob + e)

    def inverse(self) -> "SemilinearMap":
        k = self.mat.field
        e = (-self.frob) % k.f
        minv = self.mat.inverse()
        if e:
            minv = minv.map_entries(lambda x: k.frob(x, e))
        return SemilinearMap(minv, e)

    def __eq__(self, other):
        return (isinstance(other, SemilinearMap) and self.mat == other.mat
                and self.frob == other.frob)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.mat, self.frob))
        return self._hash

    def __repr__(self):
        return f"SemilinearMap(frob={self.frob}, {self.mat!r})"


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

def rref(field: GF, vectors: Iterable[Sequence[int]]) -> list[tuple]:
    """Reduced row-echelon basis (canonical) of the span of the vectors."""
    add, mul, neg, inv = field.scalar_tables()
    basis: list[list[int]] = []
    for v in vectors:
        v = list(v)
        for b in basis:
            lead = next(i for i, x in enumerate(b) if x)
            c = v[lead]
            if c:
                v = [add[x][mul[neg[c]][y]] for x, y in zip(v, b)]
        if any(v):
            lead = next(i for i, x in enumerate(v) if x)
            s = inv[v[lead]]
            v = [mul[s][x] for x in v]
            for b in basis:
                c = b[lead]
                if c:
                    b[:] = [add[x][mul[neg[c]][y]] for x, y in zip(b, v)]
            basis.append(v)
    basis.sort(key=lambda b: next(i for i, x in enumerate(b) if x))
    return [tuple(b) for b in basis]


class Subspace:
    """Subspace of GF(q)^n with a canonical reduced-echelon basis."""

    __slots__ = ("field", "ambient", "basis", "_hash")

    def __init__(self, field: GF, ambient: int,
                 vectors: Iterable[Sequence[int]]):
        self.field = field
        self.ambient = ambient
        vs = [_check_vec(field, v, ambient) for v in vectors]
        self.basis = tuple(rref(field, vs))
        self._hash = None

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence[int]) -> bool:
        v = _check_vec(self.field, v, self.ambient)
        add, mul, neg, _ = self.field.scalar_tables()
        v = list(v)
        for b in self.basis:
            lead = next(i for i, x in enumerate(b) if x)
            c = v[lead]
            if c:
                v = [add[x][mul[neg[c]][y]] for x, y in zip(v, b)]
        return not any(v)

    def vectors(self) -> Iterator[tuple]:
        """All q^dim vectors, in lexicographic order of coefficients."""
        k = self.field
        add, mul, _, _ = k.scalar_tables()
        n = self.ambient
        for coeffs in itertools.product(k.elements(), repeat=self.dim):
            out = [0] * n
            for c, b in zip(coeffs, self.basis):
                if c:
                    mc = mul[c]
                    out = [add[x][mc[y]] for x, y in zip(out, b)]
            yield tuple(out)

    def points(self) -> list[tuple]:
        """Normalised projective points of this subspace, sorted."""
        seen = set()
        for v in self.vectors():
            if any(v):
                seen.add(normalise_point(self.field, v))
        return sorted(seen)

    def perp(self, form) -> "Subspace":
        return form.perp(self)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.field == other.field
                and self.ambient == other.ambient
                and self.basis == other.basis)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.q, self.ambient, self.basis))
        return self._hash

    def __lt__(self, other):
        return self.basis < other.basis

    def __repr__(self):
        return f"Subspace{self.basis}"


def normalise_point(field: GF, v: Sequence[int]) -> tuple:
    """Canonical representative of a projective point.

    Scales so the first nonzero coordinate is 1.  This agrees with the
    reduced-echelon representative of the spanned 1-space, and it is the
    lexicographically least vector in the scalar orbit (code 1 being the
    least nonzero code).
    """
    first = next((i for i, x in enumerate(v) if x), None)
    if first is None:
        raise ValueError("zero vector is not a projective point")
    c = v[first]
    if c == 1:
        return tuple(v)
    s = field.inv(c)
    return tuple(field.mul(s, x) for x in v)


def projective_points(field: GF, n: int) -> list[tuple]:
    """All points of PG(n-1, q) as normalised tuples, in ascending order."""
    out = []
    for first in range(n):
        for tail in itertools.product(range(field.q), repeat=n - first - 1):
            out.append((0,) * first + (1,) + tail)
    out.sort()
    return out


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

class AlternatingForm:
    """beta(x,y) = x1 y4 - y1 x4 + x2 y3 - y2 x3 on GF(q)^4."""

    def __init__(self, field: GF):
        self.field = field
        self.dim = 4
        one = 1
        m = field.neg(one)
        self.gram = Mat.from_rows(field, [
            (0, 0, 0, one),
            (0, 0, one, 0),
            (0, m, 0, 0),
            (m, 0, 0, 0),
        ])

    def eval(self, u: Sequence[int], v: Sequence[int]) -> int:
        u = _check_vec(self.field, u, 4)
        v = _check_vec(self.field, v, 4)
        k = self.field
        t1 = k.sub(k.mul(u[0], v[3]), k.mul(v[0], u[3]))
        t2 = k.sub(k.mul(u[1], v[2]), k.mul(v[1], u[2]))
        return k.add(t1, t2)

    def perp(self, s: Subspace) -> Subspace:
        return _kernel(self.field, [self.gram.apply(b) for b in s.basis],
                       s.ambient)

    def is_totally_isotropic(self, s: Subspace) -> bool:
        bs = s.basis
        return all(self.eval(bs[i], bs[j]) == 0
                   for i in range(len(bs)) for j in range(i + 1, len(bs)))


class QuadraticForm:
    """An elliptic quadratic form on GF(q)^6, stored upper-triangular.

    Q(x) = x1 x2 + x3 x4 + x5^2 + x5 x6 + d x6^2 where d is the least
    field code making t^2 + t + d irreducible, so the form has Witt
    index 2 (minus type).  The associated bilinear form is the
    polarisation B(u,v) = Q(u+v) - Q(u) - Q(v).
    """

    def __init__(self, field: GF, d: int | None = None, *,
                 coeff: "Mat | None" = None):
        self.field = field
        if coeff is not None:
            if coeff.rows != coeff.cols:
                raise DimensionMismatchError("coefficient matrix not square")
            self.dim = coeff.rows
            self.d = None
            self.coeff = coeff
        else:
            self.dim = 6
            if d is None:
                bad = {field.neg(field.add(field.mul(y, y), y))
                       for y in field.elements()}
                d = next(c for c in field.elements() if c not in bad)
            self.d = d
            rows = [[0] * 6 for _ in range(6)]
            rows[0][1] = 1
            rows[2][3] = 1
            rows[4][4] = 1
            rows[4][5] = 1
            rows[5][5] = d
            self.coeff = Mat.from_rows(field, rows)
        # Gram matrix of the polarisation: coeff + coeff^T
        k = field
        n = self.dim
        self.polar_gram = Mat.from_rows(field, [
            [k.add(self.coeff.entry(i, j), self.coeff.entry(j, i))
             for j in range(n)] for i in range(n)])

    def eval(self, v: Sequence[int]) -> int:
        v = _check_vec(self.field, v, self.dim)
        k = self.field
        if self.d is not None:
            acc = k.mul(v[0], v[1])
            acc = k.add(acc, k.mul(v[2], v[3]))
            acc = k.add(acc, k.mul(v[4], v[4]))
            acc = k.add(acc, k.mul(v[4], v[5]))
            acc = k.add(acc, k.mul(self.d, k.mul(v[5], v[5])))
            return acc
        acc = 0
        for i, vi in enumerate(v):
            if vi:
                acc = k.add(acc, k.mul(vi, k.dot(self.coeff.row(i), v)))
        return acc

    def polar(self, u: Sequence[int], v: Sequence[int]) -> int:
        u = _check_vec(self.field, u, self.dim)
        v = _check_vec(self.field, v, self.dim)
        k = self.field
        s = tuple(k.add(a, b) for a, b in zip(u, v))
        return k.sub(k.sub(self.eval(s), self.eval(u)), self.eval(v))

    def is_singular(self, v: Sequence[int]) -> bool:
        return self.eval(v) == 0

    def perp(self, s: Subspace) -> Subspace:
        return _kernel(self.field,
                       [self.polar_gram.apply(b) for b in s.basis],
                       s.ambient)

    def is_totally_singular(self, s: Subspace) -> bool:
        if not all(self.eval(b) == 0 for b in s.basis):
            return False
        bs = s.basis
        return all(self.polar(bs[i], bs[j]) == 0
                   for i in range(len(bs)) for j in range(i + 1, len(bs)))


def _kernel(field: GF, rows: list[tuple], ambient: int) -> Subspace:
    """Right kernel {v : row . v = 0 for each row} as a Subspace."""
    rows = rref(field, rows)
    add, mul, neg, _ = field.scalar_tables()
    pivots = [next(i for i, x in enumerate(r) if x) for r in rows]
    free = [j for j in range(ambient) if j not in pivots]
    basis = []
    for j in free:
        v = [0] * ambient
        v[j] = 1
        for r, piv in zip(rows, pivots):
            # pivot entry is 1, so v[piv] = -r[j]
            v[piv] = neg[r[j]]
        basis.append(v)
    return Subspace(field, ambient, basis)


def sp4_membership(form: AlternatingForm, m: Mat) -> bool:
    """True iff m preserves the alternating form: M J M^T = J."""
    if m.rows != 4 or m.cols != 4:
        raise DimensionMismatchError("expected a 4x4 matrix")
    return m * form.gram * m.transpose() == form.gram


# ---------------------------------------------------------------------------
# singular subspace enumeration
# ---------------------------------------------------------------------------

def enumerate_singular(form, dim: int) -> list[Subspace]:
    """Totally isotropic/singular subspaces of the given dimension.

    Ordered by their canonical echelon bases (ascending), each exactly
    once.  dim 1 gives GQ points, dim 2 gives GQ lines.
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    k = form.field
    n = form.dim
    if isinstance(form, AlternatingForm):
        pts = projective_points(k, n)  # beta is alternating: all isotropic
    else:
        pts = [v for v in projective_points(k, n) if form.eval(v) == 0]
    if dim == 1:
        return [Subspace(k, n, [v]) for v in pts]
    if isinstance(form, AlternatingForm):
        return _isotropic_lines_by_echelon(form)
    return _singular_lines_by_pairs(form, pts)


def _isotropic_lines_by_echelon(form: AlternatingForm) -> list[Subspace]:
    # every 2x4 reduced echelon pattern, kept when beta vanishes on the
    # two basis rows; already canonical and generated in sorted order
    k = form.field
    out = []
    for p1 in range(4):
        for p2 in range(p1 + 1, 4):
            free1 = [j for j in range(p1 + 1, 4) if j != p2]
            free2 = [j for j in range(p2 + 1, 4)]
            nf = len(free1) + len(free2)
            for vals in itertools.product(k.elements(), repeat=nf):
                r1 = [0, 0, 0, 0]
                r2 = [0, 0, 0, 0]
                r1[p1] = 1
                r2[p2] = 1
                for j, c in zip(free1, vals):
                    r1[j] = c
                for j, c in zip(free2, vals[len(free1):]):
                    r2[j] = c
                if form.eval(r1, r2) == 0:
                    out.append(Subspace(k, 4, [r1, r2]))
    out.sort(key=lambda s: s.basis)
    return out


def _singular_lines_by_pairs(form: QuadraticForm,
                             pts: list[tuple]) -> list[Subspace]:
    # For each singular point u in ascending order, partition the later
    # orthogonal singular points into the lines through u.  A line is
    # recorded when u is its least point.
    k = form.field
    index = {v: i for i, v in enumerate(pts)}
    arr = np.asarray(pts, dtype=np.int64)
    mul_np = k.mul_table.astype(np.int64)
    add_np = k.add_table.astype(np.int64)
    add, mul, _, _ = k.scalar_tables()
    out = []
    for i, u in enumerate(pts):
        w = form.polar_gram.apply(u)
        prod = np.zeros(len(pts), dtype=np.int64)
        for col, wc in enumerate(w):
            if wc:
                prod = add_np[prod, mul_np[arr[:, col], wc]]
        mates = np.nonzero(prod[i + 1:] == 0)[0] + i + 1
        claimed = set()
        for j in mates:
            j = int(j)
            if j in claimed:
                continue
            v = pts[j]
            ids = [i, j]
            least = i
            for c in range(1, k.q):
                mc = mul[c]
                t = index[normalise_point(
                    k, tuple(add[a][mc[b]] for a, b in zip(u, v)))]
                ids.append(t)
                if t < least:
                    least = t
            claimed.update(x for x in ids if x > i)
            if least == i:
                out.append(Subspace(k, form.dim, [u, v]))
    out.sort(key=lambda s: s.basis)
    return out


# ---------------------------------------------------------------------------
# batched matrix algebra on stacks of code matrices
# ---------------------------------------------------------------------------

def mat_mul_batch(field: GF, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise-GF product of stacks of matrices.

    a has shape (..., n, k), b shape (..., k, m); both contain field
    codes.  Works via the field's lookup tables, so q <= 1024.
    """
    mul = field.mul_table.astype(np.int64)
    addt = field.add_table.astype(np.int64)
    prods = mul[a[..., :, :, None], b[..., None, :, :]]
    acc = prods[..., 0, :]
    for t in range(1, prods.shape[-2]):
        acc = addt[acc, prods[..., t, :]]
    return acc


def mat_identity_mask(a: np.ndarray) -> np.ndarray:
    """Boolean mask over a stack (..., n, n): which entries equal I."""
    n = a.shape[-1]
    eye = np.zeros((n, n), dtype=a.dtype)
    for i in range(n):
        eye[i, i] = 1
    return (a == eye).all(axis=(-1, -2))
