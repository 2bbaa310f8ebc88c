"""Enumeration of point-regular subgroups up to ambient conjugacy.

A regular subgroup of Aut(GQ) has order equal to the point count, so when
that count is a prime power p^k every candidate lives inside a Sylow
p-subgroup of the ambient group, and since Sylow subgroups are conjugate it
suffices to enumerate order-p^k subgroups of a single one.  Inside a p-group
every proper subgroup lies under a maximal one, and the maximal subgroups
are exactly the preimages of the hyperplanes of the Frattini quotient, so
the search is a descent through maximal-subgroup chains with transitivity
pruning (a subgroup of an intransitive group is intransitive, and regular
means transitive of order n).

When the point count is not a prime power the Sylow route is unavailable
and ``enumerate_regular`` falls back to growing sharply transitive sets
element by element, which is far slower and only sensible for small
ambients.

Everything here is deterministic: no randomness, stable orderings, and the
resulting table is sorted by invariant fingerprint so repeated runs emit
byte-identical output.
"""

import json
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

import numpy as np

from .groups import (
    UNKNOWN,
    FiniteGroup,
    PermGroup,
    Permutation,
    TooLargeError,
    _conjugate_stack,
    _element_stack,
    _subgroup_key,
    invariant_report,
    is_conjugate_subgroup,
    is_isomorphic_small,
    is_regular,
)

__all__ = [
    "NotCompatibleError",
    "SearchBudget",
    "RegularClass",
    "RegularClassTable",
    "sylow_subgroup",
    "normaliser_gens",
    "enumerate_regular",
    "classify_classes",
    "describe_group",
]


class NotCompatibleError(ValueError):
    """The point count rules out any regular subgroup of the ambient."""


class _BudgetHit(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


@dataclass
class SearchBudget:
    """Limits on a search run; ``None`` means unlimited.

    ``seconds`` is wall-clock time, ``nodes`` counts units of work
    (subgroups built, conjugacy-orbit steps).  Exhaustion never truncates a
    table silently: the result is marked incomplete and carries the
    unexplored frontier.
    """

    seconds: float | None = None
    nodes: int | None = None

    def __post_init__(self):
        if self.seconds is not None and self.seconds <= 0:
            raise ValueError("budget seconds must be positive")
        if self.nodes is not None and self.nodes <= 0:
            raise ValueError("budget node count must be positive")


class _Clock:
    def __init__(self, budget: SearchBudget | None):
        self.budget = budget or SearchBudget()
        self.t0 = time.monotonic()
        self.nodes = 0

    def tick(self, n: int = 1):
        self.nodes += n
        b = self.budget
        if b.nodes is not None and self.nodes > b.nodes:
            raise _BudgetHit(f"node budget {b.nodes} exhausted")
        if b.seconds is not None and time.monotonic() - self.t0 > b.seconds:
            raise _BudgetHit(f"time budget {b.seconds}s exhausted")


def _as_budget(budget) -> SearchBudget | None:
    if budget is None or isinstance(budget, SearchBudget):
        return budget
    return SearchBudget(seconds=float(budget))


# ---------------------------------------------------------------------------
# Sylow subgroups and normalisers
# ---------------------------------------------------------------------------

def normaliser_gens(ambient: PermGroup, sub: PermGroup, *,
                    clock: "_Clock | None" = None) -> list[Permutation]:
    """Generators of the normaliser of ``sub`` in ``ambient``.

    Walks the conjugation orbit of the subgroup under the ambient
    generators and collects Schreier generators, which together with the
    subgroup's own generators generate the full normaliser.
    """
    if not sub.gens:
        return list(ambient.gens)
    clock = clock or _Clock(None)
    stack0 = _element_stack(sub)
    key0 = _subgroup_key(stack0)
    ident = Permutation.identity(ambient.degree)
    transversal = {key0: ident}
    queue = [(stack0, ident)]
    out: list[Permutation] = list(sub.gens)
    seen = {g.arr.tobytes() for g in out}
    while queue:
        stack, u = queue.pop()
        for g in ambient.gens:
            clock.tick()
            nxt = _conjugate_stack(stack, g)
            key = _subgroup_key(nxt)
            v = u * g
            known = transversal.get(key)
            if known is None:
                transversal[key] = v
                queue.append((nxt, v))
            else:
                s = v * known.inverse()
                b = s.arr.tobytes()
                if not s.is_identity() and b not in seen:
                    seen.add(b)
                    out.append(s)
    return out


def _p_part(n: int, p: int) -> int:
    m = 1
    while n % p == 0:
        n //= p
        m *= p
    return m


def sylow_subgroup(ambient: PermGroup, p: int, *, budget=None) -> PermGroup:
    """A Sylow p-subgroup of ``ambient``.

    Grows a p-subgroup one generator at a time: while H is not yet Sylow,
    p divides |N(H)/H|, so the normaliser contains a p-element outside H,
    and adjoining it keeps the group a p-group because it normalises H.
    """
    full = _p_part(ambient.order(), p)
    clock = _Clock(_as_budget(budget))
    h = PermGroup(ambient.degree, [],
                  element_bound=ambient.element_bound)
    while h.order() < full:
        ngens = normaliser_gens(ambient, h, clock=clock)
        n_grp = PermGroup(ambient.degree, ngens,
                          element_bound=ambient.element_bound)
        found = None
        for e in _bfs_elements(n_grp, clock):
            o = e.order()
            cand = e ** (o // _p_part(o, p))
            if not cand.is_identity() and not h.contains(cand):
                found = cand
                break
        if found is None:
            raise RuntimeError("no extending p-element found; "
                               "normaliser closure is incomplete")
        h = PermGroup(ambient.degree, list(h.gens) + [found],
                      element_bound=ambient.element_bound)
        if h.order() % p or full % h.order():
            raise RuntimeError("extension left the p-subgroup chain")
    return h


def _bfs_elements(group: PermGroup, clock: "_Clock"):
    ident = Permutation.identity(group.degree)
    out = [ident]
    index = {ident}
    yield ident
    i = 0
    while i < len(out):
        for g in group.gens:
            h = out[i] * g
            if h not in index:
                clock.tick()
                index.add(h)
                out.append(h)
                yield h
        i += 1


# ---------------------------------------------------------------------------
# maximal subgroups of a p-group
# ---------------------------------------------------------------------------

def _maximal_subgroups(h: PermGroup, p: int, clock: "_Clock") -> list[PermGroup]:
    """All maximal subgroups: preimages of Frattini-quotient hyperplanes."""
    hf = FiniteGroup.from_permgroup(h)
    phi = hf.frattini()
    phi_set = set(phi)
    # coset representatives mapping onto a basis of the elementary abelian
    # quotient H/Phi
    basis: list[Permutation] = []
    span = list(phi)
    span_set = set(span)
    for e in hf.elements:
        if e not in span_set:
            basis.append(e)
            span = hf.subgroup_closure(set(span) | {e})
            span_set = set(span)
            if len(span) == hf.order:
                break
    d = len(basis)
    if p ** d * len(phi) != hf.order:
        raise RuntimeError("Frattini quotient basis has the wrong size")
    out = []
    # functionals on GF(p)^d up to scalar, via a leading 1
    for pivot in range(d):
        tail = product(range(p), repeat=d - pivot - 1)
        for rest in tail:
            c = (0,) * pivot + (1,) + rest
            clock.tick()
            gens = list(phi)
            for i in range(d):
                if i == pivot:
                    continue
                gens.append(basis[i] * basis[pivot] ** (p - c[i]))
            m = PermGroup(h.degree, gens, element_bound=h.element_bound)
            if m.order() * p != hf.order:
                raise RuntimeError("hyperplane preimage has the wrong order")
            out.append(m)
    return out


# ---------------------------------------------------------------------------
# result table
# ---------------------------------------------------------------------------

@dataclass
class RegularClass:
    rep: PermGroup
    class_id: int
    invariants: dict
    description: str
    matches: list[str] = field(default_factory=list)
    iso_class: int | None = None

    def as_dict(self) -> dict:
        return {
            "class_id": self.class_id,
            "order": self.invariants["order"],
            "description": self.description,
            "matches": list(self.matches),
            "iso_class": self.iso_class,
            "invariants": {k: v for k, v in self.invariants.items()},
            "generators": [[int(x) for x in g.arr] for g in self.rep.gens],
        }


@dataclass
class RegularClassTable:
    gq_name: str
    ambient_description: str
    n_points: int
    ambient_order: int
    strategy: str
    classes: list[RegularClass]
    complete: bool = True
    notes: list[str] = field(default_factory=list)
    frontier: list[list[list[int]]] = field(default_factory=list)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def as_dict(self) -> dict:
        return {
            "gq": self.gq_name,
            "ambient": self.ambient_description,
            "n_points": self.n_points,
            "ambient_order": self.ambient_order,
            "strategy": self.strategy,
            "num_classes": self.num_classes,
            "complete": self.complete,
            "notes": list(self.notes),
            "frontier": self.frontier,
            "classes": [c.as_dict() for c in self.classes],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def to_markdown(self) -> str:
        lines = [
            f"# Point-regular subgroup classes on {self.gq_name}",
            "",
            f"Ambient: {self.ambient_description} "
            f"(order {self.ambient_order}), strategy: {self.strategy}.",
            "",
            "| class | order | description | matches | exponent "
            "| centre | derived |",
            "|---|---|---|---|---|---|---|",
        ]
        for c in self.classes:
            inv = c.invariants
            lines.append(
                f"| {c.class_id} | {inv['order']} | {c.description} "
                f"| {', '.join(c.matches) or '-'} | {inv['exponent']} "
                f"| {inv['centre_order']} | {inv['derived_order']} |")
        if not self.complete:
            lines += ["", "Incomplete: " + "; ".join(self.notes)]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structure descriptions
# ---------------------------------------------------------------------------

def _is_prime_power(n: int):
    if n < 2:
        return None
    for p in range(2, n + 1):
        if p * p > n:
            return (n, 1)
        if n % p == 0:
            k = 0
            m = n
            while m % p == 0:
                m //= p
                k += 1
            return (p, k) if m == 1 else None
    return None


def describe_group(inv: Mapping) -> str:
    """A short structural name from an invariant report.

    Covers the orders that actually occur in regular-subgroup tables
    (p^3 and small 2-groups); anything else falls back to order/exponent.
    """
    n = inv["order"]
    exp = inv["exponent"]
    hist = dict(map(tuple, inv["element_order_histogram"]))
    if n == 8:
        if inv["is_abelian"]:
            return {2: "C2 x C2 x C2", 4: "C4 x C2", 8: "C8"}[exp]
        return "D8" if hist.get(2, 0) == 5 else "Q8"
    pk = _is_prime_power(n)
    if pk and pk[1] == 3:
        p = pk[0]
        if inv["is_abelian"]:
            if exp == p:
                return f"C{p} x C{p} x C{p}"
            if exp == p * p:
                return f"C{p * p} x C{p}"
            return f"C{n}"
        return f"extraspecial {n} of exponent {exp}"
    abel = "abelian" if inv["is_abelian"] else "nonabelian"
    return f"{abel} of order {n}, exponent {exp}"


# ---------------------------------------------------------------------------
# the search itself
# ---------------------------------------------------------------------------

def _descend(sylow: PermGroup, target: int, p: int, clock: "_Clock",
             ambient: PermGroup):
    """All regular subgroups of order ``target`` inside the Sylow group.

    Returns (leaves, frontier); the frontier is nonempty only when the
    budget ran out, and holds the unexpanded internal nodes.
    """
    n = sylow.degree
    pts = list(range(n))
    leaves: list[PermGroup] = []
    leaf_keys = set()
    layer = [sylow]
    layer_keys = {_subgroup_key(_element_stack(sylow))}
    try:
        while layer:
            nxt: list[PermGroup] = []
            nxt_keys = set()
            for h in layer:
                for m in _maximal_subgroups(h, p, clock):
                    if not m.is_transitive(pts):
                        continue
                    key = _subgroup_key(_element_stack(m))
                    if m.order() == target:
                        if key not in leaf_keys:
                            leaf_keys.add(key)
                            if is_regular(m, pts, order=target):
                                leaves.append(m)
                    elif key not in nxt_keys and key not in layer_keys:
                        nxt_keys.add(key)
                        nxt.append(m)
            # fuse conjugate internal nodes before descending further;
            # conjugate groups have conjugate subgroup lattices
            if len(nxt) > 1:
                nxt = _fuse(ambient, nxt, clock, strict=False)
            layer = nxt
            layer_keys |= nxt_keys
    except _BudgetHit:
        frontier = [[[int(x) for x in g.arr] for g in h.gens] for h in layer]
        raise _BudgetHit(("descent interrupted", leaves, frontier))
    return leaves, []


def _fuse(ambient: PermGroup, subs: list[PermGroup], clock: "_Clock",
          *, strict: bool = True) -> list[PermGroup]:
    """One representative per ambient-conjugacy class.

    Groups with different invariant fingerprints are never conjugate, so
    the pairwise tests only run within fingerprint buckets.
    """
    buckets: dict[str, list[PermGroup]] = {}
    order: list[str] = []
    for s in subs:
        fp = invariant_report(s)["fingerprint"]
        if fp not in buckets:
            buckets[fp] = []
            order.append(fp)
        buckets[fp].append(s)
    reps: list[PermGroup] = []
    for fp in order:
        kept: list[PermGroup] = []
        for s in buckets[fp]:
            dup = False
            for r in kept:
                clock.tick()
                res = is_conjugate_subgroup(ambient, s, r)
                if res is UNKNOWN:
                    if strict:
                        raise _BudgetHit("conjugacy test budget exhausted")
                    continue
                if res is not None:
                    dup = True
                    break
            if not dup:
                kept.append(s)
        reps.extend(kept)
    return reps


def _transversal_search(ambient: PermGroup, n: int, clock: "_Clock"):
    """Regular subgroups by growing sharply transitive closed sets.

    Every non-identity element of a regular group is fixed-point-free, so
    the search space is the fixed-point-free elements of the ambient,
    bucketed by where they send the base point.  Only viable for small
    ambient groups; the Sylow descent is the main route.
    """
    deg = ambient.degree
    ident = Permutation.identity(deg)
    by_image: dict[int, list[Permutation]] = {t: [] for t in range(1, deg)}
    for e in _bfs_elements(ambient, clock):
        if not e.is_identity() and not e.fixed_points():
            by_image[e.apply(0)].append(e)
    for t in by_image:
        by_image[t].sort(key=lambda g: g.arr.tobytes())

    found: list[PermGroup] = []
    found_keys = set()
    visited = set()

    def close(elems: dict, g: Permutation):
        # closure of the set with g adjoined; None when it cannot lie
        # inside a regular group of order n
        new = dict(elems)
        queue = [g]
        while queue:
            x = queue.pop()
            b = x.arr.tobytes()
            if b in new:
                continue
            if len(new) >= n:
                return None
            if not x.is_identity() and x.fixed_points():
                return None
            new[b] = x
            for y in list(new.values()):
                queue.append(x * y)
                queue.append(y * x)
        if n % len(new):
            return None
        return new

    def grow(elems: dict, gens: list[Permutation]):
        clock.tick()
        if len(elems) == n:
            key = frozenset(elems)
            if key not in found_keys:
                found_keys.add(key)
                found.append(PermGroup(deg, gens,
                                       element_bound=ambient.element_bound))
            return
        covered = {e.apply(0) for e in elems.values()}
        t = min(x for x in range(deg) if x not in covered)
        for g in by_image[t]:
            new = close(elems, g)
            if new is None:
                continue
            key = frozenset(new)
            if key in visited:
                continue
            visited.add(key)
            grow(new, gens + [g])

    grow({ident.arr.tobytes(): ident}, [])
    return found


def enumerate_regular(gq, ambient: PermGroup, budget=None, *,
                      sylow: PermGroup | None = None,
                      templates: Mapping[str, PermGroup] | None = None,
                      ) -> RegularClassTable:
    """All point-regular subgroups of ``ambient``, up to conjugacy.

    ``gq`` is the quadrangle the ambient acts on (only its name and point
    count are used here; the caller fixes the action).  ``sylow`` may carry
    a precomputed Sylow p-subgroup to skip the normaliser climb.
    ``templates`` maps names to known regular subgroups; each class is
    tagged with the names it is conjugate to.

    Budget exhaustion marks the table incomplete and records the
    unexplored frontier; it never truncates silently.
    """
    n = gq.n_points
    if ambient.degree != n:
        raise ValueError("ambient degree does not match the point count")
    amb_order = ambient.order()
    if amb_order % n:
        raise NotCompatibleError(
            f"point count {n} does not divide the ambient order {amb_order}")
    clock = _Clock(_as_budget(budget))
    pk = _is_prime_power(n)
    complete = True
    notes: list[str] = []
    frontier: list = []

    if pk is not None:
        p, _ = pk
        strategy = "sylow-descent"
        try:
            if sylow is None:
                sylow = sylow_subgroup(ambient, p, budget=clock.budget)
            else:
                if sylow.degree != n:
                    raise ValueError("sylow degree mismatch")
                for g in sylow.gens:
                    if not ambient.contains(g):
                        raise ValueError("sylow generator outside ambient")
                if sylow.order() != _p_part(amb_order, p):
                    raise ValueError("given subgroup is not Sylow")
            leaves, _ = _descend(sylow, n, p, clock, ambient)
            reps = _fuse(ambient, leaves, clock)
        except _BudgetHit as hit:
            complete = False
            if isinstance(hit.reason, tuple):
                reason, leaves, frontier = hit.reason
                notes.append(f"budget exceeded: {reason}")
                notes.append(f"{len(leaves)} regular subgroups found "
                             "before interruption; conjugacy fusion skipped")
                reps = []
            else:
                notes.append(f"budget exceeded: {hit.reason}")
                reps = []
    else:
        strategy = "transversal"
        try:
            subs = _transversal_search(ambient, n, clock)
            reps = _fuse(ambient, subs, clock)
        except _BudgetHit as hit:
            complete = False
            notes.append(f"budget exceeded: {hit.reason}")
            reps = []

    classes = []
    for rep in reps:
        if not is_regular(rep, list(range(n)), order=n):
            raise RuntimeError("candidate class representative not regular")
        inv = invariant_report(rep)
        classes.append(RegularClass(rep=rep, class_id=0, invariants=inv,
                                    description=describe_group(inv)))
    classes.sort(key=lambda c: (
        c.invariants["fingerprint"],
        _subgroup_key(_element_stack(c.rep))))
    for i, c in enumerate(classes):
        c.class_id = i

    if templates:
        tmpl_fp = {}
        for name in sorted(templates):
            t = templates[name]
            if t.degree != n:
                raise ValueError(f"template {name!r} degree mismatch")
            tmpl_fp[name] = invariant_report(t)["fingerprint"]
        for c in classes:
            for name in sorted(templates):
                if tmpl_fp[name] != c.invariants["fingerprint"]:
                    continue
                res = is_conjugate_subgroup(ambient, templates[name], c.rep)
                if res is UNKNOWN:
                    notes.append(f"template match {name!r} vs class "
                                 f"{c.class_id} undecided within budget")
                elif res is not None:
                    c.matches.append(name)

    return RegularClassTable(
        gq_name=getattr(gq, "name", str(gq)),
        ambient_description=f"PermGroup(degree={ambient.degree}, "
                            f"order={amb_order})",
        n_points=n,
        ambient_order=amb_order,
        strategy=strategy,
        classes=classes,
        complete=complete,
        notes=notes,
        frontier=frontier,
    )


def classify_classes(table: RegularClassTable, *,
                     bound: int = 4096) -> RegularClassTable:
    """Fill in isomorphism-class ids on an enumeration table.

    Same fingerprint is necessary for isomorphism; within a fingerprint
    bucket the ids are settled by explicit isomorphism search for orders
    up to ``bound``.  Larger groups are grouped by fingerprint alone and
    the table gains a note saying so.
    """
    by_fp: dict[str, list[RegularClass]] = {}
    for c in table.classes:
        by_fp.setdefault(c.invariants["fingerprint"], []).append(c)
    next_id = 0
    for c in table.classes:
        if c.iso_class is not None:
            continue
        bucket = by_fp[c.invariants["fingerprint"]]
        c.iso_class = next_id
        for other in bucket:
            if other is c or other.iso_class is not None:
                continue
            if c.invariants["order"] > bound:
                other.iso_class = next_id
                note = ("isomorphism classes over the bound grouped by "
                        "fingerprint only")
                if note not in table.notes:
                    table.notes.append(note)
                continue
            try:
                iso = is_isomorphic_small(c.rep, other.rep)
            except TooLargeError:
                iso = None
                note = (f"isomorphism test skipped for classes "
                        f"{c.class_id}/{other.class_id} (too large)")
                table.notes.append(note)
            if iso is not None:
                other.iso_class = next_id
        next_id += 1
    return table
