from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given

from pdo.algebra import UTLaurent, Window, ut_valuation
from pdo.errors import CoordinateMismatch, NoRankFits, WindowTooSmall
from pdo.parser import parse_operator
from pdo.schur import (
    SubspaceUT,
    algebra_generator_degrees,
    analyze_pair,
    check_stability,
    detect_rank,
    fg_witness,
    filtration_dims,
    graded_increments,
    level_basis,
    psi1_map,
    psi_map,
    triangle_rule,
    z_leading_operator,
)
from pdo.selftest import example_pair
from pdo.spectral import analyze_ring

from conftest import uts

W0 = Window(-64, 40, 48)


def mono(m, l, w=W0):
    return UTLaurent({(m, l): 1}, w)


def algebra(*gens, w=W0):
    return SubspaceUT("algebra", [mono(m, l, w) for m, l in gens], w)


def span(*elems, w=W0):
    return SubspaceUT("module", list(elems), w)


def brute_force_a_dims(n_max):
    """Distinct (u, t) exponents of u^c t^-(2a+3b+2c) with weight <= n."""
    out = []
    for n in range(n_max + 1):
        seen = set()
        for a in range(n + 1):
            for b in range(n + 1):
                for c in range(n + 1):
                    wgt = 2 * a + 3 * b + 2 * c
                    if wgt <= n:
                        seen.add((c, -wgt))
        out.append(len(seen))
    return out


@pytest.fixture(scope="module")
def pair():
    return example_pair(W0)


# --- coordinate changes -------------------------------------------------------


def test_psi_examples():
    w = Window(-10, 10, 5)
    assert psi_map(mono(0, -2, w)).terms == {(0, -2): 1}
    z = psi_map(mono(1, -2, w))
    assert z.terms == {(1, -1): 1} and z.coords == "z"
    # z1^-1 z2^-1 reads as d1 d2
    assert z_leading_operator(z) == {(1, 1): 1}
    assert psi_map(mono(0, 0, w)).terms == {(0, 0): 1}


def test_psi1_examples():
    w = Window(-10, 10, 5)
    z = lambda a, b: UTLaurent({(a, b): 1}, w, "z")
    assert psi1_map(z(1, 0)).terms == {(1, -1): 1}
    assert psi1_map(z(0, -2)).terms == {(0, -2): 1}
    assert psi1_map(z(1, -1)).terms == {(1, -2): 1}


def test_psi_coordinate_checks():
    w = Window(-10, 10, 5)
    with pytest.raises(CoordinateMismatch):
        psi1_map(mono(0, 1, w))
    with pytest.raises(CoordinateMismatch):
        psi_map(psi_map(mono(0, 1, w)))


@given(uts())
def test_psi_round_trip(f):
    assert psi1_map(psi_map(f)) == f


# --- filtrations ------------------------------------------------------------


def test_a_dims_match_brute_force(pair):
    A, _ = pair
    dims = filtration_dims(A, 1, 12)
    assert dims == brute_force_a_dims(12)
    # the oracle counts 13 at level 6: (0,0) (0,-2) (1,-2) (0,-3) (0,-4) (1,-4) (2,-4)
    # (0,-5) (1,-5) (0,-6) (1,-6) (2,-6) (3,-6)
    assert dims[6] == 13


def test_w_dims(pair):
    _, W = pair
    assert filtration_dims(W, 1, 12) == [(n + 1) * (n + 2) // 2 for n in range(13)]


def test_constants_dims():
    k = algebra()
    assert filtration_dims(k, 1, 8) == [1] * 9
    assert graded_increments(k, 1, 8) == [0] * 8


def test_increments(pair):
    A, W = pair
    assert graded_increments(W, 1, 10) == [n + 1 for n in range(1, 11)]
    inc = graded_increments(A, 1, 30)
    # (c, n') with n' + 2c = n and n' in the semigroup <2, 3>
    want = [sum(1 for c in range(n // 2 + 1) if n - 2 * c not in (1,)) for n in range(1, 31)]
    assert inc == want


def test_valuation_matches_membership(pair):
    _, W = pair
    lb = level_basis(W, 8)
    for f in lb.all_elements():
        l = ut_valuation(f)[1]
        assert -8 <= l
        n = -l
        assert lb.dim_at(n) > lb.dim_at(n - 1) if n > 0 else True


def test_window_too_small():
    w = Window(-5, 10, 10)
    A = algebra((0, -1), w=w)
    with pytest.raises(WindowTooSmall):
        filtration_dims(A, 1, 8)


# --- stability ----------------------------------------------------------------


def test_stability_examples(pair):
    A, W = pair
    assert check_stability(A, W, 10)
    assert not check_stability(algebra((0, -1)), span(mono(1, 0)), 4)
    assert check_stability(algebra(), W, 6)


# --- rank ---------------------------------------------------------------------


def test_rank_examples(pair):
    _, W = pair
    assert detect_rank(W, 1) == 1
    W2 = SubspaceUT("module", [], W0, rule=triangle_rule(2, 2, 2, [mono(0, 0)]))
    assert detect_rank(W2, 1) == 2
    with pytest.raises(NoRankFits):
        detect_rank(span(mono(0, 0)), 1)


def _finite_w(n_top, skip=None):
    elems = [UTLaurent({(0, 0): 1, (0, 1): 1}, W0)]
    for i in range(1, n_top + 1):
        for j in range(i + 1):
            if (j, -i) != skip:
                elems.append(mono(j, -i))
    return span(*elems)


def test_rank_negative_control():
    assert detect_rank(_finite_w(6), 1, 6) == 1
    for lvl in (1, 3, 6):
        with pytest.raises(NoRankFits):
            detect_rank(_finite_w(6, skip=(0, -lvl)), 1, 6)


# --- finite generation --------------------------------------------------------


def test_witness_example(pair):
    A, W = pair
    rep = fg_witness(A, W, 12)
    for n in range(1, 13):
        assert any(f.terms == {(n, -n): 1} for f in rep.levels[n])
    assert rep.finitely_generated_through() == 12


def test_witness_cyclic_module():
    A = algebra((0, -1))
    W = SubspaceUT("module", [mono(0, 0)], W0, over=A)
    rep = fg_witness(A, W, 8)
    assert all(not v for v in rep.levels.values())
    assert rep.finitely_generated_through() is None


def test_witness_t_inverse_only_at_level_one():
    A = algebra((0, -2), (0, -3))
    W = SubspaceUT("module", [], W0, rule=triangle_rule(0, 1, 1, [mono(0, 0)]))
    rep = fg_witness(A, W, 10)
    assert [f.terms for f in rep.levels[1]] == [{(0, -1): 1}]
    assert all(not rep.levels[n] for n in range(2, 11))


# --- cross-module and composites ---------------------------------------------


def test_generator_degrees(pair):
    A, _ = pair
    assert [d for _, d in algebra_generator_degrees(A)] == [2, 3, 2]


def test_self_intersection_agrees_with_operator_side(pair):
    A, W = pair
    rep = analyze_pair(A, W, 1, 8)
    ops = [parse_operator("d2", 2), parse_operator("d1*d2 + d1^2", 2)]
    assert rep.self_intersection == analyze_ring(ops, mmax=40).self_intersection == Fraction(1, 2)
    assert rep.r == 1 and rep.stable


def test_subspace_json_round_trip(pair):
    A, W = pair
    for S in (A, W):
        d = json.loads(json.dumps(S.to_json()))
        back = SubspaceUT.from_json(d)
        assert back.kind == S.kind
        assert filtration_dims(back, 1, 6) == filtration_dims(S, 1, 6)


def test_algebra_generators_need_negative_valuation():
    with pytest.raises(ValueError):
        algebra((1, 0))
