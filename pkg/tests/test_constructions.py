"""Tests for the explicit group constructions and identity checkers."""

import pytest
from hypothesis import given, settings, strategies as st

from gquad.constructions import (
    BASE_POINT,
    NotAnAutomorphismError,
    action_from_linear,
    ambient_stabiliser,
    axis_gens,
    build_derived_model,
    build_extraspecial27,
    build_gu513,
    centre_gens,
    elation_gens,
    elation_group,
    elation_matrix,
    iso_E_to_P,
    shear_gens,
    shear_group,
    shear_matrix,
    shear_power_matrix,
    split_gens,
    split_group,
    sylow_exponent,
    unipotent_group,
    verify_conjugation_relations,
    verify_elation_commutator_rule,
    verify_elation_product_rule,
    verify_shear_power_formula,
)
from gquad.gf import GF
from gquad.groups import (
    FiniteGroup,
    PermGroup,
    Permutation,
    TooLargeError,
    invariant_report,
    is_isomorphic_small,
    is_normal,
    is_regular,
)
from gquad.incidence import build_qminus5, line_action, verify_gq
from gquad.linalg import Mat


# -- matrix identities -------------------------------------------------------

def test_elation_product_rule_small():
    for q in (2, 3, 4):
        assert verify_elation_product_rule(GF.default(q)) == []


def test_elation_commutator_rule_small():
    for q in (2, 3, 4):
        assert verify_elation_commutator_rule(GF.default(q)) == []


def test_elation_inverse():
    k = GF.default(5)
    for a, b, c in [(0, 0, 0), (1, 2, 3), (4, 4, 1)]:
        t = elation_matrix(k, a, b, c)
        ti = elation_matrix(k, k.neg(a), k.neg(b), k.neg(c))
        assert t * ti == Mat.identity(k, 4)


def test_conjugation_relations_small():
    for q in (2, 3, 4, 5):
        rel = verify_conjugation_relations(GF.default(q))
        assert all(v == [] for v in rel.values()), rel


def test_shear_power_formula_small():
    for q in (2, 3, 4, 5, 9):
        assert verify_shear_power_formula(GF.default(q)) == []


@settings(deadline=None, max_examples=40)
@given(st.integers(1, 6), st.integers(0, 60))
def test_shear_power_matches_repeated_product(alpha, n):
    k = GF.default(7)
    acc = Mat.identity(k, 4)
    th = shear_matrix(k, alpha)
    for _ in range(n):
        acc = acc * th
    assert acc == shear_power_matrix(k, alpha, n)


def test_shear_orders():
    # order p for p > 3, order p^2 in characteristics 2 and 3
    for q, order in ((5, 5), (7, 7), (2, 4), (4, 4), (3, 9), (9, 9)):
        k = GF.default(q)
        al = 1
        th = shear_matrix(k, al)
        acc = Mat.identity(k, 4)
        got = None
        for n in range(1, order + 1):
            acc = acc * th
            if acc == Mat.identity(k, 4):
                got = n
                break
        assert got == order


# -- generating sets and matrix groups ---------------------------------------

def test_group_orders():
    for q in (2, 3, 4):
        k = GF.default(q)
        assert len(elation_group(k).elements) == q ** 3
        assert len(shear_group(k).elements) == q ** 3
        assert len(unipotent_group(k).elements) == q ** 4
    for q in (4, 9):
        assert len(split_group(GF.default(q)).elements) == q ** 3


def test_gen_counts():
    k = GF.default(8)
    assert len(centre_gens(k)) == 3
    assert len(axis_gens(k)) == 6
    assert len(elation_gens(k)) == 9
    assert len(shear_gens(k)) == 9


def test_shear_group_contains_all_shears():
    # the group does not depend on the basis: theta(alpha) is inside
    # for every alpha, not just the basis elements
    k = GF.default(4)
    P = shear_group(k)
    for al in k.elements():
        assert shear_matrix(k, al) in P.index


def test_split_gens_validation():
    k = GF.default(4)
    with pytest.raises(ValueError):
        split_gens(k, [1], None)  # one basis without the other
    with pytest.raises(ValueError):
        split_gens(k, [1], [1, 2])  # too many vectors
    with pytest.raises(ValueError):
        split_gens(k, [1], [1])  # dependent
    with pytest.raises(ValueError):
        split_gens(k, [3], [3])  # dependent


def test_split_gens_alternative_decomposition():
    k = GF.default(4)
    # U = <x>, W = <1> is a valid decomposition too
    S = split_group(k, [2], [1])
    assert len(S.elements) == 64


def test_invariants_match_small_group_lemmas():
    E2 = invariant_report(elation_group(GF.default(2)))
    assert E2["is_abelian"] and E2["exponent"] == 2
    E3 = invariant_report(elation_group(GF.default(3)))
    assert E3["is_extraspecial"] and E3["exponent"] == 3
    P3 = invariant_report(shear_group(GF.default(3)))
    assert P3["is_extraspecial"] and P3["exponent"] == 9
    P2 = invariant_report(shear_group(GF.default(2)))
    assert P2["is_abelian"] and P2["exponent"] == 4
    assert P2["element_order_histogram"] == [[1, 1], [2, 3], [4, 4]]


# -- the isomorphism E -> P --------------------------------------------------

def test_iso_e_to_p_is_an_isomorphism():
    k = GF.default(5)
    phi = iso_E_to_P(k)
    E = elation_group(k)
    assert len(phi) == 125
    assert set(phi) == set(E.elements)
    assert len(set(phi.values())) == 125
    for a in E.elements[::7]:
        for b in E.elements[::11]:
            assert phi[a * b] == phi[a] * phi[b]


def test_iso_e_to_p_rejects_small_characteristic():
    with pytest.raises(ValueError):
        iso_E_to_P(GF.default(2))
    with pytest.raises(ValueError):
        iso_E_to_P(GF.default(9))


def test_e_p_not_isomorphic_small_characteristic():
    for q in (2, 3, 4):
        k = GF.default(q)
        assert is_isomorphic_small(elation_group(k), shear_group(k)) is None


# -- actions on the derived quadrangle ---------------------------------------

def test_derived_model_and_regular_actions():
    k = GF.default(3)
    model = build_derived_model(k)
    assert model.ambient_gq.labels[model.base] == BASE_POINT
    assert model.gq.n_points == 27
    assert model.gq.order() == (2, 4)
    for gens in (elation_gens(k), shear_gens(k)):
        act = action_from_linear(k, gens, model.gq)
        assert is_regular(act, range(27))


def test_line_fixing_contrast():
    # E fixes every line through the base point, P only one
    k = GF.default(3)
    model = build_derived_model(k)
    w3 = model.ambient_gq
    pencil = set(w3.pencils()[model.base])
    assert len(pencil) == 4

    def fixed_lines(gens):
        act = action_from_linear(k, gens, w3)
        la = line_action(w3, act)
        return {ln for ln in pencil
                if all(g.apply(ln) == ln for g in la.gens)}

    assert fixed_lines(elation_gens(k)) == pencil
    fixed = fixed_lines(shear_gens(k))
    assert len(fixed) == 1
    ln = fixed.pop()
    labs = {w3.labels[p] for p in w3.lines[ln]}
    assert labs == {(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0), (1, 2, 0, 0)}


def test_split_group_line_orbits():
    # orbits of length p^k on the q non-fixed lines through the base
    k = GF.default(4)
    model = build_derived_model(k)
    w3 = model.ambient_gq
    act = action_from_linear(k, split_gens(k), w3)
    la = line_action(w3, act)
    pencil = set(w3.pencils()[model.base])
    sizes = sorted(len(o) for o in la.orbits() if set(o) & pencil)
    assert sizes == [1, 2, 2]


def test_action_rejects_line_breaker():
    k = GF.default(3)
    model = build_derived_model(k)
    bad = Mat.from_rows(k, [(1, 0, 0, 0), (0, 1, 0, 0),
                            (0, 0, 1, 0), (0, 0, 0, 2)])
    with pytest.raises(NotAnAutomorphismError):
        action_from_linear(k, [bad], model.ambient_gq)
    # on the derived quadrangle the same map fails earlier: it moves
    # points collinear with the base into the derived point set
    with pytest.raises(NotAnAutomorphismError):
        action_from_linear(k, elation_gens(k) + [bad], model.gq)


def test_ambient_stabiliser_orders():
    for q, order in ((2, 48), (3, 648)):
        k = GF.default(q)
        model = build_derived_model(k)
        amb = ambient_stabiliser(k, model.gq)
        assert amb.order() == order
        E = action_from_linear(k, elation_gens(k), model.gq)
        P = action_from_linear(k, shear_gens(k), model.gq)
        assert is_normal(amb, E)
        assert not is_normal(amb, P)


# -- regular groups on elliptic quadrics -------------------------------------

def test_extraspecial27_kinds():
    for kind, expo in (("exp3", 3), ("exp9", 9)):
        group, gq = build_extraspecial27(kind)
        assert verify_gq(gq, 2, 4) == []
        assert is_regular(group, range(27))
        rep = invariant_report(FiniteGroup.from_permgroup(group))
        assert rep["order"] == 27
        assert rep["is_extraspecial"]
        assert rep["exponent"] == expo


def test_extraspecial27_transport():
    target = build_qminus5(GF.default(2))
    group, gq = build_extraspecial27("exp9", target=target)
    assert gq is target
    assert is_regular(group, range(27))


def test_extraspecial27_bad_kind():
    with pytest.raises(ValueError):
        build_extraspecial27("exp27")


def test_gu513_structure():
    group, gq = build_gu513()
    assert gq.n_points == 4617
    assert gq.n_lines == 33345
    assert group.order() == 4617
    assert is_regular(group, range(4617))
    mult, frob = group.gens
    assert mult.order() == 513
    assert frob.order() == 9
    norm_part = PermGroup(4617, [mult])
    assert is_normal(group, norm_part)


# -- the Sylow exponent check ------------------------------------------------

def test_sylow_exponent():
    assert sylow_exponent(GF.default(2)) == 4
    assert sylow_exponent(GF.default(3)) == 9
    assert sylow_exponent(GF.default(4)) == 4
    assert sylow_exponent(GF.default(5)) == 5


def test_sylow_exponent_guard():
    with pytest.raises(TooLargeError):
        sylow_exponent(GF.default(25))
