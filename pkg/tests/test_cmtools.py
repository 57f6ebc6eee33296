from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from pdo.algebra import Poly
from pdo.cmtools import CurveLocalization, cycle_of, is_cm, ord_along, s2_closure, valuation
from pdo.errors import ZeroInput
from pdo.glue import GlueInput, MonomialAlgebra, conductor, glue_affine, monomials_upto
from pdo.parser import parse_poly


def P(*texts):
    return [parse_poly(t) for t in texts]


X, H = P("x", "h")
ONE = Poly.one(2)
CUSP = MonomialAlgebra(P("x^2", "x^3", "h"))
M2 = MonomialAlgebra(P("x^2", "x*h", "h^2", "x^3", "x^2*h", "x*h^2", "h^3"))
POLY = MonomialAlgebra(P("x", "h"))
# semigroup {a in <2,3>} minus the point (0, 1)
SUB_CUSP = MonomialAlgebra(P("x^2", "x^3", "x^2*h", "x^3*h", "h^2", "h^3"))


# --- orders and cycles ------------------------------------------------------


def test_ord_examples():
    assert ord_along(parse_poly("x^2"), ONE, X) == 2
    assert ord_along(H, ONE, X) == 0
    assert ord_along(ONE, X, X) == -1


def test_ord_zero_input():
    with pytest.raises(ZeroInput):
        ord_along(Poly.zero(2), ONE, X)


def test_nonlinear_prime_needs_assertion():
    p = parse_poly("x^2 - h")
    with pytest.raises(ValueError):
        CurveLocalization(p)
    loc = CurveLocalization(p, assume_irreducible=True)
    assert ord_along(p ** 3 * X, H, loc) == 3


factors = [X, H, X + H, X - H, X + 1, H - 2]
rational = st.tuples(
    st.lists(st.integers(0, 2), min_size=6, max_size=6),
    st.sampled_from([1, -2, 3]),
)


def build(exps, c):
    p = Poly.const(2, c)
    for f, e in zip(factors, exps):
        p = p * f ** e
    return p


@given(rational, rational, rational, rational)
def test_ord_additive(a, b, c, d):
    fa, fb, fc, fd = (build(*t) for t in (a, b, c, d))
    for pr in (X, H, X + H, X - 1 + 1):
        assert ord_along(fa * fc, fb * fd, pr) == ord_along(fa, fb, pr) + ord_along(fc, fd, pr)


@given(st.lists(st.integers(0, 3), min_size=6, max_size=6))
def test_valuation_oracle(exps):
    # the exponents used to build the product are the valuations
    p = build(exps, 1)
    for f, e in zip(factors[:4], exps[:4]):
        assert valuation(p, f) == e


def test_cycle_examples():
    assert [(p, m) for p, m in cycle_of(parse_poly("x^2*h"), ONE, [X, H]).components] == [(X, 2), (H, 1)]
    assert cycle_of(ONE, ONE, [X, H]).components == []
    c = cycle_of(X, H, [X, H])
    assert c.components == [(X, 1), (H, -1)]
    assert c.format() == "1*(x) - 1*(h)"


# --- closure ----------------------------------------------------------------


def test_closure_examples():
    assert s2_closure(CUSP).algebra.equivalent(CUSP, 12)
    clo = s2_closure(M2)
    assert clo.algebra.equivalent(POLY, 12)
    assert [fmt for fmt in (s.to_json()["adjoined"] for s in clo.trace)] == ["x", "h"]
    assert s2_closure(POLY).algebra.equivalent(POLY, 12)


def test_is_cm_examples():
    assert is_cm(CUSP)
    assert not is_cm(M2)
    assert is_cm(POLY)


def test_trace_witnesses_are_regular_pairs():
    clo = s2_closure(M2)
    cur = list(M2.generators)
    for step in clo.trace:
        A = MonomialAlgebra(cur)
        a, b = step.witness
        assert A.contains(a, 12) and A.contains(b, 12)
        assert A.contains(a * step.element, 12) and A.contains(b * step.element, 12)
        cur.append(step.element)


@pytest.mark.parametrize("A", [CUSP, M2, SUB_CUSP], ids=["cusp", "m2", "sub-cusp"])
def test_closure_idempotent(A):
    once = s2_closure(A).algebra
    twice = s2_closure(once)
    assert not twice.trace and twice.algebra.equivalent(once, 12)


def test_closure_is_minimal():
    # every adjoined element lies in each S2 overring containing A
    cases = [
        (M2, [POLY]),
        (SUB_CUSP, [CUSP, POLY]),
    ]
    for A, overrings in cases:
        clo = s2_closure(A)
        assert clo.trace
        for B in overrings:
            assert is_cm(B)
            for step in clo.trace:
                assert B.contains(step.element, 12)


def test_sub_cusp_closes_to_cusp():
    clo = s2_closure(SUB_CUSP)
    assert [s.element for s in clo.trace] == [H]
    assert clo.algebra.equivalent(CUSP, 12)


def test_s2_subring_with_odd_gap_is_fixed():
    # k[h, x^2, x^3 h]: every s with s x^3 in A is divisible by h, so nothing is adjoined
    assert is_cm(MonomialAlgebra(P("h", "x^2", "x^3*h")))


@pytest.mark.parametrize("A", [CUSP, M2, SUB_CUSP], ids=["cusp", "m2", "sub-cusp"])
def test_localization_at_h_commutes(A):
    # m in A[1/h] iff m in A'[1/h], checked by clearing h-powers up to a bound
    closed = s2_closure(A).algebra

    def in_localized(B, m):
        return any(B.contains(Poly.monomial((m[0], m[1] + k)), 12) for k in range(5))

    for m in monomials_upto(5):
        assert in_localized(A, m) == in_localized(closed, m)


def test_cusp_chain():
    A = glue_affine(GlueInput(P("x^2"), P("h"))).algebra
    assert is_cm(A)
    assert conductor(A) == P("x^2")
    assert ord_along(parse_poly("x^2"), ONE, X) == 2
