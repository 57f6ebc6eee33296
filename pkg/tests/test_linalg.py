from __future__ import annotations

from fractions import Fraction

import sympy
from hypothesis import given, strategies as st

from pdo.graded import weighted_exponents
from pdo.linalg import Echelon, det, kernel, rank, rank_mod_p, reduced_basis

entries = st.integers(-3, 3)
matrices = st.integers(1, 5).flatmap(
    lambda c: st.lists(st.lists(entries, min_size=c, max_size=c), min_size=1, max_size=5)
)


def as_vectors(m):
    return [{j: Fraction(v) for j, v in enumerate(row) if v} for row in m]


@given(matrices)
def test_rank_matches_sympy(m):
    assert rank(as_vectors(m)) == sympy.Matrix(m).rank()


@given(matrices)
def test_kernel_is_kernel(m):
    vecs = as_vectors(m)
    sols = kernel(vecs)
    assert len(sols) == len(m) - sympy.Matrix(m).rank()
    for sol in sols:
        total = {}
        for c, v in zip(sol, vecs):
            for k, x in v.items():
                total[k] = total.get(k, 0) + c * x
        assert not any(total.values())


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(entries, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_det_matches_sympy(m):
    assert det(m) == sympy.Matrix(m).det()


@given(matrices)
def test_rank_mod_large_prime(m):
    # small integer entries: reduction modulo a large prime keeps the rank
    assert rank_mod_p(m, 1_000_003) == sympy.Matrix(m).rank()


@given(matrices)
def test_reduced_basis_spans(m):
    e = Echelon()
    for v in as_vectors(m):
        e.add(v)
    red = reduced_basis(e)
    assert len(red) == len(e)
    f = Echelon()
    for v in red:
        f.add(v)
    assert all(f.contains(v) for v in as_vectors(m))


def test_weighted_exponents():
    got = sorted(weighted_exponents([1, 2], 4))
    assert got == [(0, 2), (2, 1), (4, 0)]
    assert list(weighted_exponents([2, 3], 1)) == []
