"""Tests for the permutation and abstract group machinery."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gquad.gf import GF
from gquad.groups import (
    UNKNOWN,
    FiniteGroup,
    InvalidPermutationError,
    NotInvariantError,
    PermGroup,
    Permutation,
    TooLargeError,
    invariant_report,
    is_conjugate_subgroup,
    is_isomorphic_small,
    is_normal,
    is_regular,
    is_semiregular,
    load_group,
    report_json,
    save_group,
)
from gquad.linalg import Mat


def cyc(n, *cycles):
    return Permutation.from_cycles(n, [tuple(c) for c in cycles])


def sym(n):
    """Symmetric group on n points."""
    return PermGroup(n, [cyc(n, range(n)), cyc(n, (0, 1))])


def alt(n):
    gens = [cyc(n, (i, i + 1, i + 2)) for i in range(n - 2)]
    return PermGroup(n, gens)


def brute_order(gens, degree):
    ident = Permutation.identity(degree)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                h = e * g
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return len(seen)


# -- permutations -----------------------------------------------------------

def test_permutation_composition_order():
    # x^(g*h) = h(g(x)): apply left factor first
    g = cyc(4, (0, 1))
    h = cyc(4, (1, 2))
    gh = g * h
    assert gh.apply(0) == 2
    assert gh.apply(2) == 1
    assert gh.apply(1) == 0
    hg = h * g
    assert hg.apply(0) == 1 and hg.apply(1) == 2


def test_permutation_inverse_pow_order():
    g = cyc(6, (0, 1, 2), (3, 4))
    assert g.order() == 6
    assert (g * g.inverse()).is_identity()
    assert g ** 6 == Permutation.identity(6)
    assert g ** -1 == g.inverse()
    assert g ** 4 == g * g * g * g
    assert sorted(g.cycle_lengths()) == [1, 2, 3]


def test_permutation_validation():
    with pytest.raises(InvalidPermutationError):
        Permutation([0, 0, 1])
    with pytest.raises(InvalidPermutationError):
        Permutation([0, 2])
    with pytest.raises(InvalidPermutationError):
        Permutation([-1, 0])
    with pytest.raises(InvalidPermutationError):
        cyc(3, (0, 1)) * cyc(4, (0, 1))


def test_permutation_hash_eq():
    a = cyc(5, (0, 1, 2))
    b = cyc(5, (1, 2)) * cyc(5, (0, 1))
    assert a == b and hash(a) == hash(b)
    assert a != cyc(5, (0, 2, 1))
    assert len({a, b}) == 1


@settings(max_examples=60)
@given(st.integers(3, 12).flatmap(
    lambda n: st.tuples(st.permutations(range(n)),
                        st.permutations(range(n)),
                        st.integers(0, n - 1))))
def test_permutation_properties(data):
    pa, pb, x = data
    a, b = Permutation(list(pa)), Permutation(list(pb))
    assert (a * b).apply(x) == b.apply(a.apply(x))
    assert (a * b).inverse() == b.inverse() * a.inverse()
    assert (a ** a.order()).is_identity()


# -- stabiliser chain -------------------------------------------------------

def test_symmetric_group_orders():
    for n, want in [(3, 6), (4, 24), (5, 120), (6, 720), (7, 5040)]:
        assert sym(n).order() == want


def test_alternating_and_misc_orders():
    assert alt(5).order() == 60
    assert PermGroup(4, [cyc(4, (0, 1), (2, 3)), cyc(4, (0, 2), (1, 3))]).order() == 4
    assert PermGroup(5, []).order() == 1
    # dihedral of order 10
    d = PermGroup(5, [cyc(5, range(5)), Permutation([0, 4, 3, 2, 1])])
    assert d.order() == 10


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7).flatmap(
    lambda n: st.tuples(st.permutations(range(n)),
                        st.permutations(range(n)))))
def test_chain_order_matches_closure(data):
    pa, pb = data
    n = len(pa)
    gens = [Permutation(list(pa)), Permutation(list(pb))]
    grp = PermGroup(n, gens)
    assert grp.order() == brute_order(gens, n)


def test_contains_and_elements():
    s4 = sym(4)
    assert s4.contains(cyc(4, (0, 3, 2)))
    assert s4.contains(Permutation.identity(4))
    a4 = alt(4)
    assert not a4.contains(cyc(4, (0, 1)))
    assert a4.contains(cyc(4, (0, 1), (2, 3)))
    elems = a4.elements()
    assert len(elems) == 12 == len(set(elems))
    assert all(s4.contains(e) for e in elems)


def test_elements_bound():
    big = PermGroup(9, [cyc(9, range(9)), cyc(9, (0, 1))],
                    element_bound=1000)
    with pytest.raises(TooLargeError):
        big.elements()


def test_point_stabilizer():
    s5 = sym(5)
    st0 = s5.point_stabilizer(0)
    assert st0.order() == 24
    assert all(g.apply(0) == 0 for g in st0.gens)
    assert st0.contains(cyc(5, (1, 2, 3, 4)))
    assert not st0.contains(cyc(5, (0, 1)))


def test_orbits_transitivity():
    g = PermGroup(6, [cyc(6, (0, 1, 2)), cyc(6, (3, 4))])
    assert g.orbits() == [[0, 1, 2], [3, 4], [5]]
    assert not g.is_transitive()
    assert g.is_transitive(on=[0, 1, 2])
    assert sym(6).is_transitive()
    assert g.orbit(4) == [3, 4]


def test_base_prefix_chain():
    g = PermGroup(5, sym(5).gens, base_prefix=(2,))
    assert g.order() == 120
    assert g.base()[0] == 2


# -- regularity -------------------------------------------------------------

def test_regular_actions():
    c6 = PermGroup(6, [cyc(6, range(6))])
    assert is_regular(c6, range(6))
    assert is_semiregular(c6, range(6))
    v4 = PermGroup(4, [cyc(4, (0, 1), (2, 3)), cyc(4, (0, 2), (1, 3))])
    assert is_regular(v4, range(4))
    assert not is_regular(sym(4), range(4))  # transitive but too big
    assert not is_semiregular(sym(4), range(4))


def test_semiregular_not_transitive():
    g = PermGroup(9, [cyc(9, (0, 3, 6), (1, 4, 7), (2, 5, 8))])
    assert is_semiregular(g, range(9))
    assert not is_regular(g, range(9))
    assert is_regular(g, [0, 3, 6])


def test_regular_with_supplied_order():
    c6 = PermGroup(6, [cyc(6, range(6))])
    assert is_regular(c6, range(6), order=6)
    assert not is_regular(c6, range(6), order=12)


def test_regular_invariance_check():
    g = PermGroup(3, [cyc(3, (0, 1))])
    with pytest.raises(NotInvariantError):
        is_regular(g, [0, 2])
    with pytest.raises(ValueError):
        is_regular(g, [])


# -- abstract groups and invariants -----------------------------------------

def heisenberg3():
    k = GF.default(3)
    x = Mat.from_rows(k, [(1, 1, 0), (0, 1, 0), (0, 0, 1)])
    y = Mat.from_rows(k, [(1, 0, 0), (0, 1, 1), (0, 0, 1)])
    return FiniteGroup(Mat.identity(k, 3), [x, y])


def order27_exp9():
    # C9 : C3 with the C3 acting as x -> 4x on Z/9
    a = Permutation([(x + 1) % 9 for x in range(9)])
    b = Permutation([(4 * x) % 9 for x in range(9)])
    return FiniteGroup(Permutation.identity(9), [a, b])


def test_finite_group_closure_matrix():
    k = GF.default(2)
    # GL(2,2) is symmetric of degree 3
    a = Mat.from_rows(k, [(0, 1), (1, 0)])
    b = Mat.from_rows(k, [(1, 1), (0, 1)])
    g = FiniteGroup(Mat.identity(k, 2), [a, b])
    assert g.order == 6
    assert not g.is_abelian()
    assert g.exponent() == 6
    assert len(g.centre()) == 1


def test_finite_group_limit():
    with pytest.raises(TooLargeError):
        FiniteGroup(Permutation.identity(8),
                    sym(8).gens, limit=100)


def test_invariant_report_s3():
    rep = invariant_report(sym(3))
    assert rep["order"] == 6
    assert rep["exponent"] == 6
    assert rep["centre_order"] == 1
    assert rep["derived_order"] == 3
    assert rep["lower_central_orders"] == [6, 3]
    assert rep["nilpotency_class"] == "not nilpotent"
    assert rep["frattini_order"] == 1
    assert not rep["is_abelian"]
    assert not rep["is_special"]
    assert rep["conjugacy_class_sizes"] == [1, 2, 3]
    assert rep["element_order_histogram"] == [[1, 1], [2, 3], [3, 2]]


def test_invariant_report_dihedral8():
    d8 = PermGroup(4, [cyc(4, range(4)), Permutation([0, 3, 2, 1])])
    rep = invariant_report(d8)
    assert rep["order"] == 8
    assert rep["exponent"] == 4
    assert rep["centre_order"] == 2
    assert rep["derived_order"] == 2
    assert rep["frattini_order"] == 2
    assert rep["nilpotency_class"] == 2
    assert rep["is_special"] and rep["is_extraspecial"]
    assert rep["conjugacy_class_sizes"] == [1, 1, 2, 2, 2]


def test_invariant_report_abelian():
    c6 = PermGroup(6, [cyc(6, range(6))])
    rep = invariant_report(c6)
    assert rep["is_abelian"]
    assert rep["nilpotency_class"] == 1
    assert rep["lower_central_orders"] == [6, 1]
    assert rep["frattini_order"] == 1  # squarefree order
    assert not rep["is_special"]
    v4 = PermGroup(4, [cyc(4, (0, 1), (2, 3)), cyc(4, (0, 2), (1, 3))])
    rep4 = invariant_report(v4)
    assert rep4["centre_order"] == 4 and not rep4["is_special"]


def test_invariant_report_heisenberg():
    rep = invariant_report(heisenberg3())
    assert rep["order"] == 27
    assert rep["exponent"] == 3
    assert rep["is_extraspecial"]
    assert rep["nilpotency_class"] == 2
    assert rep["element_order_histogram"] == [[1, 1], [3, 26]]
    rep9 = invariant_report(order27_exp9())
    assert rep9["order"] == 27 and rep9["exponent"] == 9
    assert rep9["is_extraspecial"]
    assert rep["fingerprint"] != rep9["fingerprint"]


def test_fingerprint_stable_under_generator_choice():
    d8a = PermGroup(4, [cyc(4, range(4)), Permutation([0, 3, 2, 1])])
    d8b = PermGroup(4, [Permutation([0, 3, 2, 1]),
                        cyc(4, (1, 3)) * cyc(4, range(4))])
    ra, rb = invariant_report(d8a), invariant_report(d8b)
    assert d8b.order() == 8
    assert ra["fingerprint"] == rb["fingerprint"]
    blob = report_json(ra)
    assert blob.endswith("\n")
    import json
    assert json.loads(blob) == ra


def test_frattini_against_lattice():
    # p-group fast path vs explicit maximal-subgroup intersection
    cases = [
        PermGroup(8, [cyc(8, range(8))]),                       # C8
        PermGroup(6, [cyc(6, (0, 1, 2, 3)), cyc(6, (4, 5))]),   # C4 x C2
        PermGroup(4, [cyc(4, range(4)), Permutation([0, 3, 2, 1])]),
        PermGroup(9, [cyc(9, (0, 1, 2), (3, 4, 5), (6, 7, 8)),
                      cyc(9, (0, 3, 6), (1, 4, 7), (2, 5, 8))]),  # C3 x C3
    ]
    for grp in cases:
        g = FiniteGroup.from_permgroup(grp)
        fast = set(g.frattini())
        maxes = g._maximal_subgroups()
        inter = set(g.elements)
        for m in maxes:
            inter &= m
        assert fast == inter


def test_element_orders_exponent():
    g = FiniteGroup.from_permgroup(sym(4))
    assert g.exponent() == 12
    assert g.element_order(cyc(4, range(4))) == 4
    hist = {}
    for o in g.element_orders():
        hist[o] = hist.get(o, 0) + 1
    assert hist == {1: 1, 2: 9, 3: 8, 4: 6}


# -- normality and conjugacy -------------------------------------------------

def test_is_normal():
    s4 = sym(4)
    assert is_normal(s4, alt(4))
    v4 = PermGroup(4, [cyc(4, (0, 1), (2, 3)), cyc(4, (0, 2), (1, 3))])
    assert is_normal(s4, v4)
    syl = PermGroup(4, [cyc(4, range(4)), Permutation([0, 3, 2, 1])])
    assert not is_normal(s4, syl)
    with pytest.raises(ValueError):
        is_normal(alt(4), PermGroup(4, [cyc(4, (0, 1))]))


def test_conjugate_subgroups():
    s4 = sym(4)
    h1 = PermGroup(4, [cyc(4, (0, 1))])
    h2 = PermGroup(4, [cyc(4, (2, 3))])
    w = is_conjugate_subgroup(s4, h1, h2)
    assert isinstance(w, Permutation)
    wi = w.inverse()
    for s in h1.elements():
        assert h2.contains(wi * s * w)
    # transposition vs double transposition: same order, not conjugate
    h3 = PermGroup(4, [cyc(4, (0, 1), (2, 3))])
    assert is_conjugate_subgroup(s4, h1, h3) is None
    # order mismatch short-circuits
    assert is_conjugate_subgroup(s4, h1, alt(4)) is None


def test_conjugate_subgroup_identity_and_budget():
    s4 = sym(4)
    h = PermGroup(4, [cyc(4, (0, 1, 2))])
    w = is_conjugate_subgroup(s4, h, h)
    assert w.is_identity()
    h2 = PermGroup(4, [cyc(4, (1, 2, 3))])
    out = is_conjugate_subgroup(s4, h, h2, budget=0)
    assert out is UNKNOWN
    assert not out
    assert is_conjugate_subgroup(s4, h, h2) is not None


def test_conjugate_sylow():
    s4 = sym(4)
    syl1 = PermGroup(4, [cyc(4, range(4)), Permutation([0, 3, 2, 1])])
    syl2 = PermGroup(4, [cyc(4, (0, 1, 3, 2)), Permutation([0, 2, 1, 3])])
    assert syl1.order() == syl2.order() == 8
    w = is_conjugate_subgroup(s4, syl1, syl2)
    assert isinstance(w, Permutation)


# -- isomorphism -------------------------------------------------------------

def test_isomorphic_dihedral_presentations():
    d8a = PermGroup(4, [cyc(4, range(4)), Permutation([0, 3, 2, 1])])
    # regular representation: elements e,r,r2,r3,s,rs,r2s,r3s
    d8b = PermGroup(8, [Permutation([1, 2, 3, 0, 7, 4, 5, 6]),
                        Permutation([4, 5, 6, 7, 0, 1, 2, 3])])
    assert d8b.order() == 8
    phi = is_isomorphic_small(d8a, d8b)
    assert phi is not None
    ga = FiniteGroup.from_permgroup(d8a)
    for x in ga:
        for y in ga:
            assert phi[x * y] == phi[x] * phi[y]
    assert len(set(map(hash, phi.values()))) == 8


def test_not_isomorphic():
    d8 = PermGroup(4, [cyc(4, range(4)), Permutation([0, 3, 2, 1])])
    # right multiplication by i and j on 1,-1,i,-i,j,-j,k,-k
    q8 = PermGroup(8, [Permutation([2, 3, 1, 0, 7, 6, 4, 5]),
                       Permutation([4, 5, 6, 7, 1, 0, 3, 2])])
    assert q8.order() == 8
    rep = invariant_report(q8)
    assert rep["element_order_histogram"] == [[1, 1], [2, 1], [4, 6]]
    assert is_isomorphic_small(d8, q8) is None
    c8 = PermGroup(8, [cyc(8, range(8))])
    assert is_isomorphic_small(d8, c8) is None
    c4c2 = PermGroup(6, [cyc(6, (0, 1, 2, 3)), cyc(6, (4, 5))])
    c2c2c2 = PermGroup(6, [cyc(6, (0, 1)), cyc(6, (2, 3)), cyc(6, (4, 5))])
    assert is_isomorphic_small(c4c2, c2c2c2) is None


def test_isomorphic_extraspecial27():
    assert is_isomorphic_small(heisenberg3(), order27_exp9()) is None
    phi = is_isomorphic_small(heisenberg3(), heisenberg3())
    assert phi is not None


def test_isomorphism_order_guard():
    with pytest.raises(TooLargeError):
        is_isomorphic_small(sym(7), sym(7), max_order=100)
    assert is_isomorphic_small(sym(3), sym(4)) is None


# -- file format -------------------------------------------------------------

def test_group_file_roundtrip(tmp_path):
    g = sym(5)
    path = tmp_path / "s5.grp"
    save_group(path, g)
    text = path.read_text()
    assert text.startswith("GRP 5 2\n")
    assert text.endswith("\n")
    back = load_group(path)
    assert back.degree == 5
    assert back.gens == g.gens
    assert back.order() == 120


def test_group_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.grp"
    path.write_text("GQX 3 1\n0 1 2\n")
    with pytest.raises(ValueError):
        load_group(path)
    path.write_text("GRP 3 1\n0 1\n")
    with pytest.raises(ValueError):
        load_group(path)
