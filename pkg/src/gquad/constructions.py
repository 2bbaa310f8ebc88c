"""Point-regular group constructions on classical quadrangles.

Everything on the symplectic side is anchored at the base point
(1,0,0,0) of W(3,q).  Its stabiliser contains the root elations
t(a,b,c) and the shears theta(alpha), lower unitriangular matrices that
multiply by simple closed-form rules.  Products of these realise the
groups this package studies: the elation group E of order q^3, the
shear-extended group P, the split variants S(U,W) built from a
decomposition of the field, and the unipotent group T of order q^4.
E, P and the S(U,W) all act point-regularly on the q^3 points of the
quadrangle derived at the base point.

Two further regular groups live on elliptic quadrics directly: the two
extraspecial groups of order 27 on Q-(5,2), and a group of order 4617
on Q-(5,8) built from the norm and trace maps of GF(2^18) over GF(8).

Matrix convention: row vectors, right action v @ M, so products apply
left to right and match the group operation of the induced
permutations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf import GF, _factorise
from .groups import (FiniteGroup, InvalidPermutationError, PermGroup,
                     Permutation, TooLargeError)
from .incidence import Quadrangle, build_from_form, build_w3, gq_isomorphic, \
    payne_derive
from .linalg import (Mat, QuadraticForm, SemilinearMap, mat_identity_mask,
                     mat_mul_batch, normalise_point, rref)

__all__ = [
    "BASE_POINT",
    "NotAnAutomorphismError",
    "elation_matrix",
    "shear_matrix",
    "shear_power_matrix",
    "elation_gens",
    "axis_gens",
    "centre_gens",
    "shear_gens",
    "split_gens",
    "unipotent_gens",
    "elation_group",
    "shear_group",
    "split_group",
    "unipotent_group",
    "DerivedModel",
    "build_derived_model",
    "action_from_linear",
    "ambient_stabiliser_gens",
    "ambient_stabiliser",
    "iso_E_to_P",
    "build_extraspecial27",
    "build_gu513",
    "verify_elation_product_rule",
    "verify_elation_commutator_rule",
    "verify_conjugation_relations",
    "verify_shear_power_formula",
    "sylow_exponent",
]

BASE_POINT = (1, 0, 0, 0)


class NotAnAutomorphismError(ValueError):
    """A linear map failed to act on a quadrangle."""


# ---------------------------------------------------------------------------
# the two families of unipotent stabiliser elements
# ---------------------------------------------------------------------------

def elation_matrix(field: GF, a: int, b: int, c: int) -> Mat:
    """The root elation t(a,b,c), fixing the base point.

    t(a,b,c) t(x,y,z) = t(a+x-bz+cy, b+y, c+z), so these q^3 matrices
    form a group, with t(a,b,c)^-1 = t(-a,-b,-c).
    """
    return Mat.from_rows(field, [
        (1, 0, 0, 0),
        (field.neg(c), 1, 0, 0),
        (b, 0, 1, 0),
        (a, b, c, 1),
    ])


def shear_matrix(field: GF, alpha: int) -> Mat:
    """The shear theta(alpha), fixing the base point."""
    a2 = field.mul(alpha, alpha)
    return Mat.from_rows(field, [
        (1, 0, 0, 0),
        (field.neg(alpha), 1, 0, 0),
        (field.neg(a2), alpha, 1, 0),
        (0, 0, alpha, 1),
    ])


def shear_power_matrix(field: GF, alpha: int, n: int) -> Mat:
    """Closed form for theta(alpha)^n.

    The binomial coefficients are divided as integers before reduction
    mod p, which keeps the formula valid in every characteristic.
    """
    k = field
    a2 = k.mul(alpha, alpha)
    a3 = k.mul(a2, alpha)
    return Mat.from_rows(k, [
        (1, 0, 0, 0),
        (k.mul(k.scalar(-n), alpha), 1, 0, 0),
        (k.mul(k.scalar(-(n * (n + 1) // 2)), a2),
         k.mul(k.scalar(n), alpha), 1, 0),
        (k.mul(k.scalar(-(n * (n * n - 1) // 6)), a3),
         k.mul(k.scalar(n * (n - 1) // 2), a2),
         k.mul(k.scalar(n), alpha), 1),
    ])


def _basis(field: GF) -> list[int]:
    # codes of 1, x, x^2, ... : a GF(p)-basis of the field
    return [field.p ** j for j in range(field.f)]


# ---------------------------------------------------------------------------
# generating sets and matrix groups
# ---------------------------------------------------------------------------

def centre_gens(field: GF) -> list[Mat]:
    """Generators of Z = {t(a,0,0)}, order q."""
    return [elation_matrix(field, a, 0, 0) for a in _basis(field)]


def axis_gens(field: GF) -> list[Mat]:
    """Generators of R = {t(a,b,0)}, order q^2."""
    return centre_gens(field) + \
        [elation_matrix(field, 0, b, 0) for b in _basis(field)]


def elation_gens(field: GF) -> list[Mat]:
    """Generators of the full elation group E = {t(a,b,c)}, order q^3."""
    return axis_gens(field) + \
        [elation_matrix(field, 0, 0, c) for c in _basis(field)]


def shear_gens(field: GF) -> list[Mat]:
    """Generators of P = <R, all shears>, order q^3."""
    return axis_gens(field) + \
        [shear_matrix(field, al) for al in _basis(field)]


def split_gens(field: GF, u_basis: Sequence[int] | None = None,
               w_basis: Sequence[int] | None = None) -> list[Mat]:
    """Generators of S(U,W) = <R, theta(U), t(0,0,W)>, order q^3.

    U and W are given by GF(p)-bases (field codes) and must satisfy
    U + W = field as a direct sum.  The defaults are U = <1> and
    W = <x, ..., x^(f-1)>.
    """
    k = field
    base = _basis(k)
    if u_basis is None and w_basis is None:
        u_basis, w_basis = base[:1], base[1:]
    elif u_basis is None or w_basis is None:
        raise ValueError("give both bases or neither")
    u_basis, w_basis = list(u_basis), list(w_basis)
    if len(u_basis) + len(w_basis) != k.f:
        raise ValueError("basis sizes must add up to the field degree")
    prime = GF.default(k.p)
    rows = [k.coeffs(v) for v in u_basis + w_basis]
    if len(rref(prime, rows)) != k.f:
        raise ValueError("U and W do not span the field")
    return axis_gens(k) + [shear_matrix(k, u) for u in u_basis] + \
        [elation_matrix(k, 0, 0, w) for w in w_basis]


def unipotent_gens(field: GF) -> list[Mat]:
    """Generators of T = <E, all shears>, order q^4."""
    return elation_gens(field) + \
        [shear_matrix(field, al) for al in _basis(field)]


def _matrix_group(field: GF, gens: list[Mat]) -> FiniteGroup:
    return FiniteGroup(Mat.identity(field, 4), gens)


def elation_group(field: GF) -> FiniteGroup:
    return _matrix_group(field, elation_gens(field))


def shear_group(field: GF) -> FiniteGroup:
    return _matrix_group(field, shear_gens(field))


def split_group(field: GF, u_basis: Sequence[int] | None = None,
                w_basis: Sequence[int] | None = None) -> FiniteGroup:
    return _matrix_group(field, split_gens(field, u_basis, w_basis))


def unipotent_group(field: GF) -> FiniteGroup:
    return _matrix_group(field, unipotent_gens(field))


# ---------------------------------------------------------------------------
# the derived quadrangle and matrix actions on labelled quadrangles
# ---------------------------------------------------------------------------

@dataclass
class DerivedModel:
    """W(3,q) together with its derivation at the base point."""
    field: GF
    ambient_gq: Quadrangle
    base: int
    gq: Quadrangle


def build_derived_model(field: GF) -> DerivedModel:
    w = build_w3(field)
    x = w.point_id(BASE_POINT)
    return DerivedModel(field, w, x, payne_derive(w, x))


def action_from_linear(field: GF, maps: Sequence, gq: Quadrangle,
                       ) -> PermGroup:
    """Point permutations of a labelled quadrangle induced by matrices.

    Labels must be normalised coordinate rows; maps can be Mat or
    SemilinearMap.  A map that fails to permute the points, or permutes
    them but breaks a line, raises NotAnAutomorphismError.
    """
    if gq.labels is None:
        raise ValueError("quadrangle carries no coordinate labels")
    lm = gq.line_matrix()
    gens = []
    for m in maps:
        images = []
        for lab in gq.labels:
            w = normalise_point(field, m.apply(lab))
            try:
                images.append(gq.point_id(w))
            except KeyError:
                raise NotAnAutomorphismError(
                    f"{lab} maps to {w}, which is not a point") from None
        try:
            g = Permutation(images)
        except InvalidPermutationError:
            raise NotAnAutomorphismError(
                "map is not injective on points") from None
        mapped = np.sort(g.arr[lm], axis=1)
        both = np.concatenate([lm, mapped.astype(lm.dtype)])
        if np.unique(both, axis=0).shape[0] != lm.shape[0]:
            raise NotAnAutomorphismError("map does not preserve lines")
        gens.append(g)
    return PermGroup(gq.n_points, gens)


def _primitive(field: GF) -> int:
    q = field.q
    for c in field.nonzero():
        if all(field.pow(c, (q - 1) // r) != 1
               for r in _factorise(q - 1)):
            return c
    raise AssertionError("no primitive element")  # unreachable


def ambient_stabiliser_gens(field: GF) -> list:
    """Generators of the base-point stabiliser in PGammaSp(4,q).

    Root elations, the unipotents of a Levi SL(2) acting on the middle
    two coordinates, a torus element, and the Frobenius map when the
    field is not prime.  Feed these to action_from_linear on W(3,q) or
    on the derived quadrangle.
    """
    k = field
    gens: list = list(elation_gens(k))
    for al in _basis(k):
        gens.append(Mat.from_rows(k, [(1, 0, 0, 0), (0, 1, al, 0),
                                      (0, 0, 1, 0), (0, 0, 0, 1)]))
        gens.append(Mat.from_rows(k, [(1, 0, 0, 0), (0, 1, 0, 0),
                                      (0, al, 1, 0), (0, 0, 0, 1)]))
    lam = _primitive(k)
    if lam != 1:
        gens.append(Mat.from_rows(k, [(lam, 0, 0, 0), (0, 1, 0, 0),
                                      (0, 0, 1, 0), (0, 0, 0, k.inv(lam))]))
    if k.f > 1:
        gens.append(SemilinearMap(Mat.identity(k, 4), 1))
    return gens


def ambient_stabiliser(field: GF, gq: Quadrangle) -> PermGroup:
    """The stabiliser of the base point, acting on a labelled model."""
    return action_from_linear(field, ambient_stabiliser_gens(field), gq)


# ---------------------------------------------------------------------------
# the isomorphism E -> P in characteristic > 3
# ---------------------------------------------------------------------------

def _extend_homomorphism(src: FiniteGroup, images: Sequence,
                         identity) -> dict | None:
    """Extend generator images over all of src, or None on conflict.

    src.elements is in closure order, so every element is reached as an
    earlier element times a generator.  Checking every such product
    pins down multiplicativity on the whole group.
    """
    img = {src.identity: identity}
    for e in src.elements:
        he = img[e]
        for g, hg in zip(src.gens, images):
            x = e * g
            hx = he * hg
            prev = img.get(x)
            if prev is None:
                img[x] = hx
            elif prev != hx:
                return None
    return img


def iso_E_to_P(field: GF) -> dict:
    """An explicit isomorphism from E onto P, as a dict of matrices.

    Sends t(a,b,0) to itself and t(0,-alpha^2/2,alpha) to
    theta(alpha); only exists in characteristic > 3 (in characteristic
    2 and 3 the two groups have different exponents).
    """
    k = field
    if k.p in (2, 3):
        raise ValueError(
            f"E and P are not isomorphic in characteristic {k.p}")
    P = shear_group(k)
    E = elation_group(k)
    inv2 = k.inv(k.scalar(2))
    images = list(axis_gens(k))
    for al in _basis(k):
        b = k.neg(k.mul(inv2, k.mul(al, al)))
        images.append(elation_matrix(k, 0, b, al))
    assert len(P.gens) == len(images)
    phi = _extend_homomorphism(P, images, Mat.identity(k, 4))
    if phi is None:
        raise AssertionError("shear-to-elation map failed to extend")
    out = {}
    for pe, ee in phi.items():
        if ee in out:
            raise AssertionError("shear-to-elation map is not injective")
        out[ee] = pe
    if set(out) != set(E.elements):
        raise AssertionError("image is not the elation group")
    return out


# ---------------------------------------------------------------------------
# regular groups on elliptic quadrics
# ---------------------------------------------------------------------------

# x^2 + xy + y^2: anisotropic over GF(2), preserved by the order-3 map A
_PLANE = ((1, 1), (0, 1))
_A3 = ((0, 1), (1, 1))
_A3_INV = ((1, 1), (1, 0))
_I2 = ((1, 0), (0, 1))


def _triple_plane_form(field: GF) -> QuadraticForm:
    rows = [[0] * 6 for _ in range(6)]
    for blk in range(3):
        for i in range(2):
            for j in range(2):
                rows[2 * blk + i][2 * blk + j] = _PLANE[i][j]
    return QuadraticForm(field, coeff=Mat.from_rows(field, rows))


def _block_matrix(field: GF, blocks) -> Mat:
    """A 6x6 matrix assembled from a 3x3 grid of 2x2 blocks."""
    rows = [[0] * 6 for _ in range(6)]
    for bi, brow in enumerate(blocks):
        for bj, blk in enumerate(brow):
            if blk is None:
                continue
            for i in range(2):
                for j in range(2):
                    rows[2 * bi + i][2 * bj + j] = blk[i][j]
    return Mat.from_rows(field, rows)


def build_extraspecial27(kind: str, target: Quadrangle | None = None,
                         ) -> tuple[PermGroup, Quadrangle]:
    """A point-regular extraspecial group of order 27 on Q-(5,2).

    kind is "exp3" or "exp9", the exponent of the group.  The model
    quadrangle splits GF(2)^6 into three anisotropic planes, which is
    where the generators are block matrices; pass target (any copy of
    Q-(5,2)) to have the action transported onto it instead.  Returns
    (group, quadrangle acted on).
    """
    k = GF.default(2)
    gq = build_from_form(k, _triple_plane_form(k), 2, 4,
                         "Q-(5,2) three-plane model")
    if kind == "exp3":
        mats = [
            _block_matrix(k, [[_A3, None, None], [None, _A3_INV, None],
                              [None, None, _I2]]),
            _block_matrix(k, [[_I2, None, None], [None, _A3, None],
                              [None, None, _A3_INV]]),
            _block_matrix(k, [[None, _I2, None], [None, None, _I2],
                              [_I2, None, None]]),
        ]
    elif kind == "exp9":
        mats = [
            _block_matrix(k, [[None, _A3, None], [None, None, _I2],
                              [_I2, None, None]]),
            _block_matrix(k, [[None, _I2, None], [None, None, _A3],
                              [_I2, None, None]]),
        ]
    else:
        raise ValueError(f"kind must be 'exp3' or 'exp9', not {kind!r}")
    group = action_from_linear(k, mats, gq)
    if target is None:
        return group, gq
    iso = gq_isomorphic(gq, target)
    if iso is None:
        raise ValueError("target is not a copy of Q-(5,2)")
    pa = Permutation([iso[i] for i in range(gq.n_points)])
    pai = pa.inverse()
    return PermGroup(target.n_points,
                     [pai * g * pa for g in group.gens]), target


def build_gu513() -> tuple[PermGroup, Quadrangle]:
    """A point-regular group of order 4617 = 513 * 9 on Q-(5,8).

    Model: GF(2^18) viewed as a 6-space over GF(8).  The composite
    Q(x) = Tr(x^513) of the norm onto GF(512) and the trace onto GF(8)
    is an elliptic quadratic form, so its 4617 singular projective
    points and totally singular lines form Q-(5,8).  Multiplication by
    the 513 norm-one elements together with the Frobenius x -> x^4
    (order 9, semilinear over GF(8)) act regularly on the points.

    Returns (group, quadrangle); group.gens[0] is the norm-one
    multiplier, group.gens[1] the Frobenius.
    """
    k = GF(p=2, f=18)
    q1 = k.q - 1                       # 262143 = 513 * 511
    exp_l, log_l = k._ensure_exp_log()
    exp = np.asarray(exp_l, dtype=np.int64)
    log = np.asarray(log_l, dtype=np.int64)

    def pow_all(v, n):
        out = exp[(log[v] * n) % q1]
        return np.where(v == 0, 0, out)

    codes = np.arange(k.q, dtype=np.int64)
    norm = pow_all(codes, 513)                       # lies in GF(512)
    qval = norm ^ pow_all(norm, 8) ^ pow_all(norm, 64)   # trace to GF(8)

    # GF(8)* is generated by zeta^step; the projective representative
    # of a vector is the least code in its scalar orbit
    step = q1 // 7
    rep = codes.copy()
    for j in range(1, 7):
        m = rep.copy()
        m[1:] = exp[(log[codes[1:]] + j * step) % q1]
        m[0] = 0
        np.minimum(rep, m, out=rep)

    singular = codes[(qval == 0) & (codes > 0)]
    pts = np.unique(rep[singular])
    n = int(pts.size)

    look = np.full(k.q, -1, dtype=np.int64)
    look[pts] = np.arange(n)

    # for singular u, w the polarisation collapses to B(u,w) = Q(u+w),
    # and addition of codes is xor, so collinearity is one table gather
    lines = []
    for i in range(n):
        u = int(pts[i])
        mates = pts[qval[np.bitwise_xor(pts, u)] == 0]
        mates = mates[mates != u]
        umul = [int(exp[(log[u] + j * step) % q1]) for j in range(7)]
        claimed = set()
        for w in mates.tolist():
            if w in claimed:
                continue
            cell = {w} | {int(rep[w ^ m]) for m in umul}
            claimed |= cell
            idxs = sorted(int(look[c]) for c in cell) + [i]
            idxs.sort()
            if idxs[0] == i:
                lines.append(tuple(idxs))

    gq = Quadrangle(n, lines, s=8, t=64,
                    labels=[int(c) for c in pts],
                    name="Q-(5,8) norm-trace model")

    def perm_from_codes(img):
        t = look[img]
        if (t < 0).any():
            raise AssertionError("map does not preserve the point set")
        return Permutation(t)

    mult = perm_from_codes(rep[exp[(log[pts] + 511) % q1]])
    frob = perm_from_codes(rep[exp[(log[pts] * 4) % q1]])
    return PermGroup(n, [mult, frob]), gq


# ---------------------------------------------------------------------------
# identity checkers
# ---------------------------------------------------------------------------

def _field_luts(field: GF):
    add = field.add_table.astype(np.int64)
    mul = field.mul_table.astype(np.int64)
    neg = np.array([field.neg(v) for v in field.elements()],
                   dtype=np.int64)
    return add, mul, neg


def _elation_stack(field: GF):
    """All q^3 root elations as one array, with their parameter grids."""
    q = field.q
    _, _, neg = _field_luts(field)
    idx = np.arange(q ** 3)
    a, b, c = idx // (q * q), (idx // q) % q, idx % q
    t = np.zeros((q ** 3, 4, 4), dtype=np.int64)
    for d in range(4):
        t[:, d, d] = 1
    t[:, 1, 0] = neg[c]
    t[:, 2, 0] = b
    t[:, 3, 0] = a
    t[:, 3, 1] = b
    t[:, 3, 2] = c
    return t, a, b, c


def verify_elation_product_rule(field: GF, limit: int = 5) -> list:
    """Check t(a,b,c) t(x,y,z) = t(a+x-bz+cy, b+y, c+z) on all pairs.

    Returns up to limit counterexamples as ((a,b,c), (x,y,z)) tuples;
    an empty list means the rule holds.
    """
    add, mul, neg = _field_luts(field)
    q = field.q
    t, a, b, c = _elation_stack(field)
    n = q ** 3
    a1, b1, c1 = a[:, None], b[:, None], c[:, None]
    x, y, z = a[None, :], b[None, :], c[None, :]
    ap = add[add[a1, x], add[neg[mul[b1, z]], mul[c1, y]]]
    bp = add[b1, y]
    cp = add[c1, z]
    eidx = ap * (q * q) + bp * q + cp
    bad = []
    chunk = max(1, (1 << 25) // (n * 64 * 8))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        prod = mat_mul_batch(field, t[lo:hi, None], t[None, :])
        ok = (prod == t[eidx[lo:hi]]).all(axis=(2, 3))
        for i, j in zip(*np.nonzero(~ok)):
            bad.append(((int(a[lo + i]), int(b[lo + i]), int(c[lo + i])),
                        (int(a[j]), int(b[j]), int(c[j]))))
            if len(bad) >= limit:
                return bad
    return bad


def verify_elation_commutator_rule(field: GF, limit: int = 5) -> list:
    """Check [t(a,b,c), t(x,y,z)] = t(2(cy-bz), 0, 0) on all pairs."""
    add, mul, neg = _field_luts(field)
    q = field.q
    t, a, b, c = _elation_stack(field)
    n = q ** 3
    inv_idx = neg[a] * (q * q) + neg[b] * q + neg[c]
    ti = t[inv_idx]
    two = field.scalar(2)
    b1, c1 = b[:, None], c[:, None]
    y, z = b[None, :], c[None, :]
    ap = mul[two, add[mul[c1, y], neg[mul[b1, z]]]]
    eidx = ap * (q * q)
    bad = []
    chunk = max(1, (1 << 25) // (n * 64 * 8))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        left = mat_mul_batch(field, ti[lo:hi, None], ti[None, :])
        right = mat_mul_batch(field, t[lo:hi, None], t[None, :])
        com = mat_mul_batch(field, left, right)
        ok = (com == t[eidx[lo:hi]]).all(axis=(2, 3))
        for i, j in zip(*np.nonzero(~ok)):
            bad.append(((int(a[lo + i]), int(b[lo + i]), int(c[lo + i])),
                        (int(a[j]), int(b[j]), int(c[j]))))
            if len(bad) >= limit:
                return bad
    return bad


def verify_conjugation_relations(field: GF, limit: int = 5) -> dict:
    """The four identities tying shears to root elations.

    conjugate:        theta^-1 t(a,b,c) theta
                        = t(a - 2*alpha*b - 2*alpha^2*c, b + alpha*c, c)
    commutator:       [t(a,b,c), theta] = t(-alpha(c^2+2*alpha*c+2b),
                                            alpha*c, 0)
    product:          theta(alpha) theta(beta)
                        = t(alpha^2 beta, alpha beta, 0) theta(alpha+beta)
    shear_commutator: [theta(alpha), theta(beta)]
                        = t(alpha beta (alpha-beta), 0, 0)

    Exhaustive over all parameters; returns a dict from identity name
    to a list (at most limit long) of offending parameter tuples.
    """
    k = field
    two = k.scalar(2)
    out: dict[str, list] = {"conjugate": [], "commutator": [],
                            "product": [], "shear_commutator": []}

    def note(key, item):
        if len(out[key]) < limit:
            out[key].append(item)

    for al in k.elements():
        th = shear_matrix(k, al)
        thi = th.inverse()
        al2 = k.mul(al, al)
        for a in k.elements():
            for b in k.elements():
                for c in k.elements():
                    t = elation_matrix(k, a, b, c)
                    got = thi * t * th
                    a_new = k.sub(a, k.add(k.mul(two, k.mul(al, b)),
                                           k.mul(two, k.mul(al2, c))))
                    want = elation_matrix(k, a_new,
                                          k.add(b, k.mul(al, c)), c)
                    if got != want:
                        note("conjugate", (al, (a, b, c)))
                    got = t.inverse() * thi * t * th
                    inner = k.add(k.mul(c, c),
                                  k.add(k.mul(two, k.mul(al, c)),
                                        k.mul(two, b)))
                    want = elation_matrix(k, k.neg(k.mul(al, inner)),
                                          k.mul(al, c), 0)
                    if got != want:
                        note("commutator", (al, (a, b, c)))

    for al in k.elements():
        tha = shear_matrix(k, al)
        for be in k.elements():
            thb = shear_matrix(k, be)
            got = tha * thb
            want = elation_matrix(k, k.mul(k.mul(al, al), be),
                                  k.mul(al, be), 0) * \
                shear_matrix(k, k.add(al, be))
            if got != want:
                note("product", (al, be))
            got = tha.inverse() * thb.inverse() * tha * thb
            want = elation_matrix(k, k.mul(k.mul(al, be), k.sub(al, be)),
                                  0, 0)
            if got != want:
                note("shear_commutator", (al, be))
    return out


def verify_shear_power_formula(field: GF, n_max: int | None = None,
                               limit: int = 5) -> list:
    """Compare theta(alpha)^n with its closed form for 0 <= n <= n_max.

    The default n_max runs past two full periods of theta.  Returns up
    to limit offending (alpha, n) pairs.
    """
    k = field
    period = k.p * k.p if k.p in (2, 3) else k.p
    if n_max is None:
        n_max = 2 * period + 1
    bad = []
    for al in k.elements():
        th = shear_matrix(k, al)
        acc = Mat.identity(k, 4)
        for nth in range(n_max + 1):
            if acc != shear_power_matrix(k, al, nth):
                bad.append((al, nth))
                if len(bad) >= limit:
                    return bad
            acc = acc * th
    return bad


def sylow_exponent(field: GF) -> int:
    """Exponent of the unitriangular subgroup of GL(4,q), by powering.

    That subgroup is a Sylow p-subgroup of GL(4,q).  All q^6 of its
    elements are raised to the p-th (and if needed p^2-th) power in
    batches; the answer is p^2 in characteristic 2 and 3, p beyond.
    """
    q, p = field.q, field.p
    if q > 9:
        raise TooLargeError(f"q^6 matrices get too big for q = {q}")
    count = q ** 6
    mats = np.zeros((count, 4, 4), dtype=np.int64)
    for d in range(4):
        mats[:, d, d] = 1
    idx = np.arange(count)
    for pos, (i, j) in enumerate([(0, 1), (0, 2), (0, 3),
                                  (1, 2), (1, 3), (2, 3)]):
        mats[:, i, j] = (idx // q ** pos) % q

    def stack_pow(stack, e):
        out = None
        base = stack
        while e:
            if e & 1:
                out = base if out is None else \
                    mat_mul_batch(field, out, base)
            e >>= 1
            if e:
                base = mat_mul_batch(field, base, base)
        return out

    all_p = True
    all_p2 = True
    for lo in range(0, count, 1 << 16):
        part = mats[lo:lo + (1 << 16)]
        pw = stack_pow(part, p)
        if not mat_identity_mask(pw).all():
            all_p = False
            if not mat_identity_mask(stack_pow(pw, p)).all():
                all_p2 = False
    if all_p:
        return p
    if all_p2:
        return p * p
    raise AssertionError("unipotent exponent exceeds p^2")
