"""Finite generalised quadrangles as point-line incidence structures.

Points are integers 0..n-1; a line is a sorted tuple of point ids and
the line list itself is kept sorted, so equal structures have equal
representations.  A Quadrangle may carry labels (for the classical
models these are normalised projective coordinate tuples), which is how
matrix actions get transported onto point permutations.

The two classical models here are the symplectic quadrangle (all points
of PG(3,q), totally isotropic lines, order (q,q)) and the elliptic
quadric in PG(5,q) (order (q,q^2)).  Derivation at a regular point x
follows Payne: keep the points not collinear with x, trim old lines,
and add the perp-perp spans through x as new lines, giving order
(s-1, s+1).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .gf import GF
from .groups import PermGroup, Permutation, TooLargeError
from .linalg import AlternatingForm, QuadraticForm, enumerate_singular

__all__ = [
    "Quadrangle",
    "Violation",
    "NotRegularPointError",
    "build_from_form",
    "build_w3",
    "build_qminus5",
    "verify_gq",
    "dual",
    "line_action",
    "perp_set",
    "double_perp",
    "payne_derive",
    "gq_isomorphic",
    "aut_incidence",
    "save_gq",
    "load_gq",
]


class NotRegularPointError(ValueError):
    """Derivation attempted at a point with a short perp-perp span."""

    def __init__(self, point, witness, size, expected):
        self.point = point
        self.witness = witness
        self.size = size
        self.expected = expected
        super().__init__(
            f"point {point} is not regular: span with {witness} has "
            f"{size} points, expected {expected}")


@dataclass(frozen=True)
class Violation:
    """One canonical witness of a failed incidence check."""

    category: str
    witness: tuple
    message: str


class Quadrangle:
    """An incidence structure with GQ conventions (not validated here)."""

    def __init__(self, n_points: int, lines, *, s: int | None = None,
                 t: int | None = None, labels=None, name: str = "GQ"):
        self.n_points = n_points
        canon = []
        for line in lines:
            tup = tuple(sorted(line))
            if tup and (tup[0] < 0 or tup[-1] >= n_points):
                raise ValueError(f"line {tup} has out-of-range points")
            canon.append(tup)
        canon.sort()
        self.lines = tuple(canon)
        self.s = s
        self.t = t
        self.name = name
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n_points:
                raise ValueError("labels length must match point count")
        self.labels = labels
        self._label_index = None
        self._line_matrix = None
        self._neighbors = None
        self._pencils = None

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    def order(self) -> tuple[int, int]:
        """(s, t), inferred from the structure when not declared."""
        s = self.s if self.s is not None else len(self.lines[0]) - 1
        t = self.t if self.t is not None else len(self.pencils()[0]) - 1
        return s, t

    def point_id(self, label) -> int:
        if self.labels is None:
            raise ValueError("quadrangle has no point labels")
        if self._label_index is None:
            self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        return self._label_index[label]

    def line_matrix(self) -> np.ndarray:
        if self._line_matrix is None:
            sizes = {len(line) for line in self.lines}
            if len(sizes) != 1:
                raise ValueError("lines have mixed sizes")
            self._line_matrix = np.array(self.lines, dtype=np.int32)
        return self._line_matrix

    def neighbors(self) -> list[np.ndarray]:
        """Sorted array of points collinear with each point (excluded)."""
        if self._neighbors is None:
            mat = self.line_matrix()
            k = mat.shape[1]
            pairs_src = []
            pairs_dst = []
            for i, j in itertools.combinations(range(k), 2):
                pairs_src.append(mat[:, i])
                pairs_dst.append(mat[:, j])
                pairs_src.append(mat[:, j])
                pairs_dst.append(mat[:, i])
            src = np.concatenate(pairs_src)
            dst = np.concatenate(pairs_dst)
            order = np.lexsort((dst, src))
            src, dst = src[order], dst[order]
            counts = np.bincount(src, minlength=self.n_points)
            chunks = np.split(dst, np.cumsum(counts)[:-1])
            self._neighbors = [np.unique(c) for c in chunks]
        return self._neighbors

    def pencils(self) -> list[list[int]]:
        """Line indices through each point."""
        if self._pencils is None:
            pens = [[] for _ in range(self.n_points)]
            for idx, line in enumerate(self.lines):
                for p in line:
                    pens[p].append(idx)
            self._pencils = pens
        return self._pencils

    def collinear(self, a: int, b: int) -> bool:
        if a == b:
            return False
        nb = self.neighbors()[a]
        i = np.searchsorted(nb, b)
        return i < nb.size and nb[i] == b

    def __repr__(self):
        return (f"Quadrangle({self.name}: {self.n_points} points, "
                f"{self.n_lines} lines)")


# ---------------------------------------------------------------------------
# classical models
# ---------------------------------------------------------------------------

def build_from_form(field: GF, form, s: int, t: int,
                    name: str) -> Quadrangle:
    """Point-line geometry of the singular points and lines of a form."""
    points = [sub.basis[0] for sub in enumerate_singular(form, 1)]
    index = {p: i for i, p in enumerate(points)}
    lines = [tuple(index[p] for p in sub.points())
             for sub in enumerate_singular(form, 2)]
    return Quadrangle(len(points), lines, s=s, t=t,
                      labels=points, name=name)


def build_w3(field: GF) -> Quadrangle:
    """The symplectic quadrangle of order (q,q) on all of PG(3,q)."""
    q = field.q
    return build_from_form(field, AlternatingForm(field), q, q,
                           f"W(3,{q})")


def build_qminus5(field: GF) -> Quadrangle:
    """The elliptic-quadric quadrangle of order (q,q^2) in PG(5,q)."""
    q = field.q
    return build_from_form(field, QuadraticForm(field), q, q * q,
                           f"Q-(5,{q})")


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def _first_bad_line(gq: Quadrangle, s: int) -> Violation | None:
    for idx, line in enumerate(gq.lines):
        if len(set(line)) != len(line):
            return Violation("line_arity", (idx,),
                             f"line {idx} repeats a point")
        if len(line) != s + 1:
            return Violation("line_arity", (idx,),
                             f"line {idx} has {len(line)} points, "
                             f"expected {s + 1}")
    return None


def verify_gq(gq: Quadrangle, s: int | None = None,
              t: int | None = None) -> list[Violation]:
    """Check the generalised-quadrangle axioms for order (s,t).

    Returns [] when valid, otherwise a single canonical Violation: the
    first failing check in a fixed category order (line arity, point
    degree, pair uniqueness, one-point-per-external-line axiom), with
    the lexicographically least witness ids.
    """
    if s is None:
        s = gq.s if gq.s is not None else len(gq.lines[0]) - 1
    if t is None:
        t = gq.t if gq.t is not None else len(gq.pencils()[0]) - 1
    n = gq.n_points

    bad = _first_bad_line(gq, s)
    if bad is not None:
        return [bad]

    mat = gq.line_matrix()
    degrees = np.bincount(mat.ravel(), minlength=n)
    if not (degrees == t + 1).all():
        p = int(np.nonzero(degrees != t + 1)[0][0])
        return [Violation("point_degree", (p,),
                          f"point {p} lies on {int(degrees[p])} lines, "
                          f"expected {t + 1}")]

    k = s + 1
    enc_parts = []
    for i, j in itertools.combinations(range(k), 2):
        a = mat[:, i].astype(np.int64)
        b = mat[:, j].astype(np.int64)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        enc_parts.append(lo * n + hi)
    enc = np.concatenate(enc_parts)
    uniq, counts = np.unique(enc, return_counts=True)
    dup = uniq[counts > 1]
    if dup.size:
        code = int(dup.min())
        return [Violation("pair_uniqueness", (code // n, code % n),
                          f"points {code // n} and {code % n} lie on "
                          f"more than one common line")]

    # axiom: a point off a line sees exactly one of its points
    nb = np.stack(gq.neighbors())  # (n, s*(t+1)), valid after the above
    worst: tuple[int, int] | None = None
    chunk = max(1, (1 << 22) // max(n, 1))
    for start in range(0, gq.n_lines, chunk):
        rows = mat[start:start + chunk]
        c = rows.shape[0]
        gathered = nb[rows].astype(np.int64)  # (c, k, deg)
        offsets = (np.arange(c, dtype=np.int64) * n)[:, None, None]
        cnt = np.bincount((gathered + offsets).ravel(),
                          minlength=c * n).reshape(c, n)
        expected = np.ones((c, n), dtype=cnt.dtype)
        np.put_along_axis(expected, rows.astype(np.int64), s, axis=1)
        mism = np.argwhere(cnt != expected)
        if mism.size:
            for line_local, p in mism:
                cand = (int(p), start + int(line_local))
                if worst is None or cand < worst:
                    worst = cand
    if worst is not None:
        p, ell = worst
        return [Violation("axiom", (p, ell),
                          f"point {p} and line {ell} break the "
                          f"one-collinear-point rule")]
    return []


# ---------------------------------------------------------------------------
# duality, perps, derivation
# ---------------------------------------------------------------------------

def dual(gq: Quadrangle) -> Quadrangle:
    """Swap the roles of points and lines."""
    s, t = gq.order()
    return Quadrangle(gq.n_lines, gq.pencils(), s=t, t=s,
                      name=f"dual {gq.name}")


def line_action(gq: Quadrangle, group: PermGroup) -> PermGroup:
    """The permutation group induced on line indices by a point action.

    Every generator must send lines to lines; a generator that breaks a
    line raises ValueError.
    """
    if group.degree != gq.n_points:
        raise ValueError("group degree does not match the point count")
    index = {line: i for i, line in enumerate(gq.lines)}
    gens = []
    for g in group.gens:
        images = []
        for line in gq.lines:
            img = tuple(sorted(int(g.apply(p)) for p in line))
            j = index.get(img)
            if j is None:
                raise ValueError(f"generator maps line {line} off the "
                                 "line set")
            images.append(j)
        gens.append(Permutation(images))
    return PermGroup(gq.n_lines, gens)


def perp_set(gq: Quadrangle, x: int) -> list[int]:
    """x together with every point collinear with it, ascending."""
    return sorted(set(gq.neighbors()[x].tolist()) | {x})


def double_perp(gq: Quadrangle, x: int, y: int) -> list[int]:
    """The span {x,y}^perp-perp, ascending."""
    if x == y:
        raise ValueError("span needs two distinct points")
    nbs = gq.neighbors()
    px = np.append(nbs[x], x)
    py = np.append(nbs[y], y)
    trace = np.intersect1d(px, py)
    span = None
    for w in trace:
        pw = np.append(nbs[int(w)], int(w))
        span = pw if span is None else np.intersect1d(span, pw)
    return sorted(int(v) for v in span)


def payne_derive(gq: Quadrangle, x: int) -> Quadrangle:
    """Derived quadrangle of order (s-1, s+1) at a regular point x."""
    s, t = gq.order()
    if s != t:
        raise ValueError(f"derivation needs order (s,s), got ({s},{t})")
    if not 0 <= x < gq.n_points:
        raise ValueError(f"no point {x}")
    perp_x = set(perp_set(gq, x))
    derived = [p for p in range(gq.n_points) if p not in perp_x]
    new_id = {p: i for i, p in enumerate(derived)}

    lines = []
    for line in gq.lines:
        if x in line:
            continue
        kept = [new_id[p] for p in line if p in new_id]
        if len(kept) != s:
            raise AssertionError("external line meets perp more than once")
        lines.append(tuple(kept))

    covered = set()
    for y in derived:
        if y in covered:
            continue
        span = double_perp(gq, x, y)
        if len(span) != t + 1:
            raise NotRegularPointError(x, y, len(span), t + 1)
        rest = [p for p in span if p != x]
        if any(p not in new_id for p in rest):
            raise AssertionError("span leaves the derived point set")
        covered.update(rest)
        lines.append(tuple(new_id[p] for p in rest))

    labels = None
    if gq.labels is not None:
        labels = tuple(gq.labels[p] for p in derived)
    return Quadrangle(len(derived), lines, s=s - 1, t=s + 1, labels=labels,
                      name=f"{gq.name} derived at {x}")


# ---------------------------------------------------------------------------
# isomorphism and automorphisms via the collinearity graph
# ---------------------------------------------------------------------------
#
# A GQ has no triangles, so each line is recoverable from the graph as
# two collinear points plus their common neighbours; graph isomorphisms
# are exactly incidence isomorphisms.  The search below is plain colour
# refinement with individualisation.

_GRAPH_LIMIT = 4096


def _adjacency(gq: Quadrangle) -> np.ndarray:
    if gq.n_points > _GRAPH_LIMIT:
        raise TooLargeError(
            f"{gq.n_points} points is past the graph-search bound")
    adj = np.zeros((gq.n_points, gq.n_points), dtype=bool)
    for i, nb in enumerate(gq.neighbors()):
        adj[i, nb] = True
    return adj


def _refine_pair(adj_a, adj_b, col_a, col_b):
    """Joint colour refinement; None when class sizes diverge."""
    while True:
        palette = int(max(col_a.max(), col_b.max())) + 1
        sig_a = [col_a]
        sig_b = [col_b]
        for c in range(palette):
            sig_a.append(adj_a @ (col_a == c))
            sig_b.append(adj_b @ (col_b == c))
        sig_a = np.stack(sig_a, axis=1)
        sig_b = np.stack(sig_b, axis=1)
        both = np.concatenate([sig_a, sig_b])
        _, inverse = np.unique(both, axis=0, return_inverse=True)
        new_a = inverse[:len(col_a)].astype(np.int64)
        new_b = inverse[len(col_a):].astype(np.int64)
        ca = np.bincount(new_a, minlength=int(inverse.max()) + 1)
        cb = np.bincount(new_b, minlength=int(inverse.max()) + 1)
        if not (ca == cb).all():
            return None
        # refinement only splits classes, so a stable count means done
        if len(np.unique(new_a)) == len(np.unique(col_a)):
            return new_a, new_b
        col_a, col_b = new_a, new_b


def _extract_map(adj_a, adj_b, col_a, col_b):
    order_a = np.argsort(col_a, kind="stable")
    order_b = np.argsort(col_b, kind="stable")
    perm = np.empty(len(col_a), dtype=np.int64)
    perm[order_a] = order_b
    if (adj_b[perm][:, perm] == adj_a).all():
        return perm
    return None


def _search_iso(adj_a, adj_b, col_a, col_b):
    refined = _refine_pair(adj_a, adj_b, col_a, col_b)
    if refined is None:
        return None
    col_a, col_b = refined
    counts = np.bincount(col_a)
    split = np.nonzero(counts > 1)[0]
    if split.size == 0:
        return _extract_map(adj_a, adj_b, col_a, col_b)
    c = int(split[0])
    fresh = int(max(col_a.max(), col_b.max())) + 1
    v = int(np.nonzero(col_a == c)[0][0])
    for w in np.nonzero(col_b == c)[0]:
        na = col_a.copy()
        nb = col_b.copy()
        na[v] = fresh
        nb[int(w)] = fresh
        found = _search_iso(adj_a, adj_b, na, nb)
        if found is not None:
            return found
    return None


def _line_set(gq: Quadrangle) -> set:
    return set(gq.lines)


def gq_isomorphic(g1: Quadrangle, g2: Quadrangle) -> dict[int, int] | None:
    """A point bijection carrying lines to lines, or None."""
    if g1.n_points != g2.n_points or g1.n_lines != g2.n_lines:
        return None
    adj_a, adj_b = _adjacency(g1), _adjacency(g2)
    col = np.zeros(g1.n_points, dtype=np.int64)
    perm = _search_iso(adj_a, adj_b, col, col.copy())
    if perm is None:
        return None
    mapped = {tuple(sorted(int(perm[p]) for p in line)) for line in g1.lines}
    if mapped != _line_set(g2):
        raise AssertionError("graph map does not respect the line sets")
    return {i: int(perm[i]) for i in range(g1.n_points)}


def aut_incidence(gq: Quadrangle) -> PermGroup:
    """The full automorphism group, as permutations of the points."""
    adj = _adjacency(gq)
    n = gq.n_points
    fixed: list[int] = []
    gens: list[Permutation] = []
    expected = 1
    while True:
        col = np.zeros(n, dtype=np.int64)
        for rank, p in enumerate(fixed):
            col[p] = rank + 1
        refined = _refine_pair(adj, adj, col, col.copy())
        col = refined[0]
        counts = np.bincount(col)
        split = np.nonzero(counts > 1)[0]
        if split.size == 0:
            break
        cell = int(split[0])
        members = np.nonzero(col == cell)[0]
        v = int(members[0])
        level_gens: list[Permutation] = []
        orbit = {v}
        fresh = int(col.max()) + 1
        for w in members[1:]:
            w = int(w)
            if w in orbit:
                continue
            ca = col.copy()
            cb = col.copy()
            ca[v] = fresh
            cb[w] = fresh
            perm = _search_iso(adj, adj, ca, cb)
            if perm is None:
                continue
            g = Permutation(perm)
            gens.append(g)
            level_gens.append(g)
            frontier = [v]
            while frontier:
                a = frontier.pop()
                for h in level_gens:
                    b = h.apply(a)
                    if b not in orbit:
                        orbit.add(b)
                        frontier.append(b)
        expected *= len(orbit)
        fixed.append(v)
    group = PermGroup(n, gens)
    if group.order() != expected:
        raise AssertionError("orbit product disagrees with the chain order")
    lines = _line_set(gq)
    for g in group.gens:
        mapped = {tuple(sorted(int(g.arr[p]) for p in line))
                  for line in gq.lines}
        if mapped != lines:
            raise AssertionError("automorphism breaks the line set")
    return group


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def save_gq(path, gq: Quadrangle, extra: dict | None = None):
    """Write the GQ file plus a .json provenance sidecar."""
    s, t = gq.order()
    rows = [f"GQ {gq.n_points} {gq.n_lines} {s} {t}"]
    rows.extend(" ".join(str(p) for p in line) for line in gq.lines)
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    meta = {
        "name": gq.name,
        "n_points": gq.n_points,
        "n_lines": gq.n_lines,
        "s": s,
        "t": t,
    }
    if extra:
        meta.update(extra)
    with open(f"{path}.json", "w") as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_gq(path) -> Quadrangle:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "GQ":
            raise ValueError("not a GQ file")
        n_points, n_lines, s, t = (int(x) for x in header[1:])
        lines = []
        for _ in range(n_lines):
            lines.append(tuple(int(tok) for tok in fh.readline().split()))
    name = "GQ"
    try:
        with open(f"{path}.json") as fh:
            name = json.load(fh).get("name", name)
    except (OSError, json.JSONDecodeError):
        pass
    return Quadrangle(n_points, lines, s=s, t=t, name=name)
