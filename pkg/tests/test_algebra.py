from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import assume, given

from pdo.algebra import (
    INF,
    Poly,
    TruncatedSeries,
    UTLaurent,
    Window,
    series_exp,
    series_invert,
    ut_mul,
    ut_valuation,
)
from pdo.errors import EmptyResultWindow, PrecisionZero, WindowOverflow, WindowTooSmall, ZeroConstantTerm, ZeroInput

from conftest import WIN, polys, series, uts, x


def ts(p, n):
    return TruncatedSeries(p, n)


# --- Poly -----------------------------------------------------------------


def test_poly_drops_zeros_and_orders_grlex():
    p = Poly(2, {(1, 0): 1, (0, 2): 3, (0, 0): 0, (2, 0): Fraction(2, 4)})
    assert (0, 0) not in p.terms
    assert p.coeff((2, 0)) == Fraction(1, 2)
    assert p.leading()[0] == (2, 0)
    assert list(p.terms) == sorted(p.terms, key=lambda e: (sum(e), e))


@given(polys(), polys(), polys())
def test_poly_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == Poly.zero(2)


@given(polys(), polys())
def test_poly_divmod_reconstructs(a, b):
    assume(not b.is_zero())
    q, r = a.divmod(b)
    assert q * b + r == a


@given(polys())
def test_poly_json_round_trip(p):
    assert Poly.from_json(json.loads(json.dumps(p.to_json()))) == p


def test_poly_json_uses_decimal_strings():
    d = Poly(1, {(3,): Fraction(2 ** 70, 3)}).to_json()
    assert d["terms"] == [{"exp": [3], "num": str(2 ** 70), "den": "3"}]


# --- TruncatedSeries ------------------------------------------------------


def test_invert_scalar():
    assert series_invert(TruncatedSeries.const(2, 2, 4)).body == Poly.const(2, Fraction(1, 2))


def test_invert_geometric():
    g = series_invert(ts(1 - x(1), 3))
    assert g.body == 1 + x(1) + x(1) ** 2
    assert g.precision == 3


def test_invert_square():
    f = ts((1 - x(1)) ** 2, 3)
    g = series_invert(f)
    assert g.body == 1 + 2 * x(1) + 3 * x(1) ** 2
    # oracle: the product is 1 modulo M^3
    assert (f * g).agrees_with(TruncatedSeries.const(2, 1), below=3)


def test_invert_zero_constant_term():
    with pytest.raises(ZeroConstantTerm):
        series_invert(ts(x(0), 4))


@given(series(unit=True))
def test_invert_two_sided(f):
    g = series_invert(f)
    one = TruncatedSeries.const(2, 1)
    assert (f * g).agrees_with(one) and (g * f).agrees_with(one)
    assert g.precision == f.precision


@given(series(), series(), series())
def test_series_ring_axioms(a, b, c):
    assert ((a * b) * c).agrees_with(a * (b * c))
    assert (a * (b + c)).agrees_with(a * b + a * c)


@given(series(precision=6), series(precision=6))
def test_ord_additive(f, g):
    assume(not f.is_zero() and not g.is_zero())
    h = f * g
    # below precision only: the product is known modulo M^(N + min ord)
    if h.is_zero():
        assert f.ord_m() + g.ord_m() >= h.precision
    else:
        assert h.ord_m() == f.ord_m() + g.ord_m()


def test_product_precision_gains_from_order():
    f = ts(x(0), 3)
    g = ts(x(1) ** 2, 3)
    assert (f * g).precision == 4


def test_ord_of_zero():
    with pytest.raises(ZeroInput):
        TruncatedSeries(Poly.zero(2)).ord_m()
    with pytest.raises(PrecisionZero):
        ts(x(0) ** 5, 3).ord_m()


def test_exp_log_identity():
    g = ts(x(0) + x(1), 5)
    assert (series_exp(g) * series_exp(-g)).agrees_with(TruncatedSeries.const(2, 1))


def test_series_json_round_trip():
    f = ts(1 + x(0) - Fraction(1, 3) * x(1) ** 2, 4)
    assert TruncatedSeries.from_json(json.loads(json.dumps(f.to_json()))) == f
    e = TruncatedSeries(x(0))
    assert e.to_json()["precision"] is None and TruncatedSeries.from_json(e.to_json()).precision == INF


# --- UTLaurent ------------------------------------------------------------


def ut(terms, w=WIN):
    return UTLaurent(terms, w)


def test_valuation_examples():
    assert ut_valuation(ut({(0, 2): 1})) == (0, 2)
    assert ut_valuation(ut({(3, -1): 1})) == (3, -1)
    assert ut_valuation(ut({(1, 1): 1, (1, 2): 1, (0, 3): 1})) == (1, 1)


def test_valuation_errors():
    with pytest.raises(ZeroInput):
        ut_valuation(ut({}))
    with pytest.raises(WindowTooSmall):
        ut_valuation(ut({(0, WIN.tmin): 1}))


def test_mul_examples():
    assert ut_mul(ut({(0, -1): 1}), ut({(0, 1): 1})).terms == {(0, 0): 1}
    assert ut_mul(ut({(0, 0): 1, (0, 1): 1}), ut({(0, 0): 1, (0, 1): -1})).terms == {(0, 0): 1, (0, 2): -1}
    assert ut_mul(ut({(1, -2): 1}), ut({(1, -2): 1})).terms == {(2, -4): 1}


def test_mul_window_is_conservative():
    w = Window(-5, 5, 3)
    f = UTLaurent({(0, 0): 1, (0, 5): 1}, w)
    g = UTLaurent({(0, -2): 1}, w)
    h = ut_mul(f, g)
    # t^5 * t^-2 = t^3 is known; f's unknown tail above t^5 pollutes levels above 3
    assert h.window.tmax == 3 and h.terms == {(0, -2): 1, (0, 3): 1}


def test_mul_empty_window():
    # a windowed zero carries no information past its top level
    w = Window(-3, 3, 3)
    with pytest.raises(EmptyResultWindow):
        ut_mul(UTLaurent({}, w), UTLaurent({(0, 1): 1}, w))


def test_mul_overflow_on_u():
    w = Window(-5, 5, 3)
    with pytest.raises(WindowOverflow):
        ut_mul(UTLaurent({(2, 0): 1}, w), UTLaurent({(2, 0): 1}, w))


@given(uts(), uts())
def test_valuation_multiplicative(f, g):
    try:
        nf, ng = ut_valuation(f), ut_valuation(g)
        nh = ut_valuation(ut_mul(f, g))
    except (WindowTooSmall, EmptyResultWindow, WindowOverflow):
        assume(False)
    assert nh == (nf[0] + ng[0], nf[1] + ng[1])


@given(uts())
def test_ut_json_round_trip(f):
    assert UTLaurent.from_json(json.loads(json.dumps(f.to_json()))) == f


def test_ut_json_rejects_terms_outside_window():
    d = {"terms": [{"u": 0, "t": 99, "num": "1", "den": "1"}], "window": WIN.to_json()}
    with pytest.raises(WindowOverflow):
        UTLaurent.from_json(d)
