from __future__ import annotations

from fractions import Fraction

from hypothesis import settings, strategies as st

from pdo.algebra import Poly, TruncatedSeries, UTLaurent, Window
from pdo.diffop import DiffOp

settings.register_profile("pdo", max_examples=60, deadline=None)
settings.load_profile("pdo")

small = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@st.composite
def polys(draw, nvars=2, max_deg=4, max_terms=5):
    exps = st.tuples(*[st.integers(0, max_deg) for _ in range(nvars)]).filter(lambda e: sum(e) <= max_deg)
    terms = draw(st.dictionaries(exps, small, max_size=max_terms))
    return Poly(nvars, terms)


@st.composite
def series(draw, nvars=2, precision=5, unit=False):
    p = draw(polys(nvars, precision - 1))
    if unit and not p.constant_term():
        p = p + draw(st.sampled_from([1, -2, Fraction(1, 3)]))
    return TruncatedSeries(p, precision)


@st.composite
def operators(draw, nvars=2, max_order=2, precision=6):
    alphas = st.tuples(*[st.integers(0, max_order) for _ in range(nvars)]).filter(lambda a: sum(a) <= max_order)
    keys = draw(st.lists(alphas, min_size=1, max_size=4, unique=True))
    terms = {a: draw(polys(nvars, 3, 3)) for a in keys}
    return DiffOp(nvars, terms, precision)


WIN = Window(-20, 20, 10)


@st.composite
def uts(draw, window=WIN, max_terms=4):
    key = st.tuples(st.integers(0, window.umax), st.integers(window.tmin + 1, window.tmax))
    terms = draw(st.dictionaries(key, small.filter(bool), min_size=1, max_size=max_terms))
    return UTLaurent(terms, window)


def x(i, n=2):
    return Poly.var(n, i)
