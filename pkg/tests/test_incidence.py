"""Tests for generalised-quadrangle construction and verification."""

import json

import numpy as np
import pytest

from gquad.gf import GF
from gquad.incidence import (
    NotRegularPointError,
    Quadrangle,
    Violation,
    aut_incidence,
    build_qminus5,
    build_w3,
    double_perp,
    dual,
    gq_isomorphic,
    load_gq,
    payne_derive,
    perp_set,
    save_gq,
    verify_gq,
)


def grid33():
    """The 3x3 grid, a quadrangle of order (2,1) with 72 automorphisms."""
    lines = [(0, 1, 2), (3, 4, 5), (6, 7, 8),
             (0, 3, 6), (1, 4, 7), (2, 5, 8)]
    return Quadrangle(9, lines, s=2, t=1, name="grid 3x3")


# -- construction ------------------------------------------------------------

def test_w3_counts():
    for q in (2, 3, 4, 5):
        gq = build_w3(GF.default(q))
        want = (q + 1) * (q * q + 1)
        assert gq.n_points == want
        assert gq.n_lines == want
        assert gq.order() == (q, q)
        assert all(len(line) == q + 1 for line in gq.lines)


def test_qminus5_counts():
    for q in (2, 3):
        gq = build_qminus5(GF.default(q))
        assert gq.n_points == (q + 1) * (q ** 3 + 1)
        assert gq.n_lines == (q * q + 1) * (q ** 3 + 1)
        assert gq.order() == (q, q * q)


def test_point_labels_roundtrip():
    gq = build_w3(GF.default(3))
    for i in (0, 7, gq.n_points - 1):
        assert gq.point_id(gq.labels[i]) == i
    with pytest.raises(KeyError):
        gq.point_id((9, 9, 9, 9))


def test_quadrangle_validation():
    with pytest.raises(ValueError):
        Quadrangle(3, [(0, 3)])
    with pytest.raises(ValueError):
        Quadrangle(3, [(0, 1)], labels=("a",))


# -- verification ------------------------------------------------------------

def test_verify_valid():
    assert verify_gq(grid33()) == []
    for q in (2, 3, 4, 5):
        assert verify_gq(build_w3(GF.default(q))) == []
    assert verify_gq(build_qminus5(GF.default(2))) == []
    assert verify_gq(build_qminus5(GF.default(3))) == []


def test_verify_line_arity():
    gq = Quadrangle(9, [(0, 1, 2), (3, 4), (6, 7, 8),
                        (0, 3, 6), (1, 4, 7), (2, 5, 8)], s=2, t=1)
    out = verify_gq(gq)
    assert len(out) == 1 and out[0].category == "line_arity"
    dup = Quadrangle(9, [(0, 1, 1), (3, 4, 5), (6, 7, 8),
                         (0, 3, 6), (1, 4, 7), (2, 5, 8)], s=2, t=1)
    out = verify_gq(dup)
    assert out[0].category == "line_arity" and out[0].witness == (0,)


def test_verify_point_degree():
    base = grid33()
    # canonical ordering puts (6,7,8) last, so dropping it starves 6,7,8
    out = verify_gq(Quadrangle(9, base.lines[:-1], s=2, t=1))
    assert out[0].category == "point_degree"
    assert out[0].witness == (6,)  # least under-covered point


def test_verify_pair_uniqueness():
    lines = list(grid33().lines) + [(0, 1, 2)]
    # duplicate line: same pairs twice, degrees now wrong too
    out = verify_gq(Quadrangle(9, lines, s=2, t=1), s=2, t=1)
    assert out[0].category == "point_degree"
    # doubled edges keep sizes and degrees intact but repeat pairs
    doubled = [(0, 1), (0, 1), (2, 3), (2, 3), (4, 5), (4, 5)]
    out = verify_gq(Quadrangle(6, doubled, s=1, t=1))
    assert out[0].category == "pair_uniqueness"
    assert out[0].witness == (0, 1)
    assert isinstance(out[0], Violation)


def test_verify_axiom():
    # two disjoint triangles plus a perfect matching is line-regular
    # and pair-unique but breaks the one-collinear-point rule
    lines = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    out = verify_gq(Quadrangle(6, lines, s=1, t=1))
    assert out[0].category == "axiom"
    assert out[0].witness == (0, 2)  # point 0 against line (1,2)


# -- perp machinery ----------------------------------------------------------

def test_perp_sets_w3():
    q = 3
    gq = build_w3(GF.default(q))
    ps = perp_set(gq, 0)
    assert len(ps) == q * q + q + 1
    assert 0 in ps
    far = next(p for p in range(gq.n_points) if p not in ps)
    span = double_perp(gq, 0, far)
    assert len(span) == q + 1
    assert 0 in span and far in span
    # every point of the span has the same trace
    for z in span:
        if z not in (0, far):
            assert double_perp(gq, 0, z) == span


def test_dual_grid():
    d = dual(grid33())
    assert d.n_points == 6 and d.n_lines == 9
    assert d.order() == (1, 2)
    assert verify_gq(d) == []


def test_dual_w3_2_selfdual():
    gq = build_w3(GF.default(2))
    d = dual(gq)
    assert verify_gq(d) == []
    assert gq_isomorphic(d, gq) is not None


# -- derivation --------------------------------------------------------------

def test_derive_w32():
    gq = build_w3(GF.default(2))
    der = payne_derive(gq, 0)
    assert der.n_points == 8
    assert der.order() == (1, 3)
    assert der.n_lines == 16
    assert verify_gq(der) == []
    assert der.labels is not None and len(der.labels) == 8


def test_derive_w33_gives_elliptic():
    der = payne_derive(build_w3(GF.default(3)), 5)
    assert der.n_points == 27 and der.n_lines == 45
    assert der.order() == (2, 4)
    assert verify_gq(der) == []
    q52 = build_qminus5(GF.default(2))
    phi = gq_isomorphic(der, q52)
    assert phi is not None
    assert sorted(phi.values()) == list(range(27))


def test_derive_rejects_wrong_order():
    with pytest.raises(ValueError):
        payne_derive(build_qminus5(GF.default(2)), 0)


def test_derive_not_regular_point():
    # the dual of W(3,3) has order (3,3) but no regular points
    d = dual(build_w3(GF.default(3)))
    with pytest.raises(NotRegularPointError) as err:
        payne_derive(d, 0)
    assert err.value.point == 0
    assert err.value.size < err.value.expected


# -- isomorphism and automorphisms -------------------------------------------

def test_not_isomorphic_different_gqs():
    w2 = build_w3(GF.default(2))
    assert gq_isomorphic(w2, build_w3(GF.default(3))) is None
    der = payne_derive(build_w3(GF.default(3)), 0)
    q52 = build_qminus5(GF.default(2))
    # same parameters, shuffled copy must map
    rng = np.random.default_rng(11)
    relab = rng.permutation(27)
    shuffled = Quadrangle(27, [tuple(int(relab[p]) for p in line)
                               for line in q52.lines], s=2, t=4)
    phi = gq_isomorphic(q52, shuffled)
    assert phi is not None
    assert gq_isomorphic(der, shuffled) is not None


def test_aut_grid():
    assert aut_incidence(grid33()).order() == 72


def test_aut_w32():
    g = aut_incidence(build_w3(GF.default(2)))
    assert g.order() == 720
    assert g.is_transitive()


def test_aut_q52():
    g = aut_incidence(build_qminus5(GF.default(2)))
    assert g.order() == 51840
    assert g.is_transitive()


def test_aut_w33():
    g = aut_incidence(build_w3(GF.default(3)))
    assert g.order() == 51840


# -- files -------------------------------------------------------------------

def test_gq_file_roundtrip(tmp_path):
    gq = build_w3(GF.default(2))
    path = tmp_path / "w32.gq"
    save_gq(path, gq, extra={"source": "unit test"})
    text = path.read_text()
    first = text.splitlines()[0]
    assert first == "GQ 15 15 2 2"
    assert text.endswith("\n")
    meta = json.loads((tmp_path / "w32.gq.json").read_text())
    assert meta["name"] == "W(3,2)" and meta["source"] == "unit test"
    back = load_gq(path)
    assert back.n_points == gq.n_points
    assert back.lines == gq.lines
    assert back.name == "W(3,2)"
    assert verify_gq(back) == []


def test_gq_file_bad_header(tmp_path):
    path = tmp_path / "bad.gq"
    path.write_text("GX 1 0 1 1\n")
    with pytest.raises(ValueError):
        load_gq(path)
