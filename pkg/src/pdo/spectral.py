"""Spectral data of a commutative ring of operators.

Pipeline: constant principal symbols -> graded pieces gr_j(B) inside k[xi]
-> cumulative dimensions dim B_m -> exact quasi-polynomial leading
coefficient -> self-intersection n! * c, compared with the rank of the module
L = D / (x_1 D + ... + x_n D) computed through its own filtration.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import INF, Poly, TruncatedSeries, series_exp
from .diffop import (
    DiffOp,
    SymbolPoly,
    constant_symbol,
    op_commutator,
    op_mul,
    order_of,
    principal_symbol,
    symbol_image,
)
from .errors import (
    BudgetExceeded,
    NonConstantSymbol,
    NotCommutative,
    NotStabilized,
    PrecisionExhausted,
    SymbolConditionFailed,
)
from .graded import MonomialCache, minimal_generators, weighted_exponents
from .linalg import Echelon, det, rank_mod_p


@dataclass
class RingPresentation:
    """Generators of a commutative subring B of D, checked to commute at stored precision."""

    generators: List[DiffOp]
    declared_commutative: bool = True
    certified_precision: object = INF

    def __post_init__(self):
        if not self.generators:
            raise ValueError("a ring presentation needs at least one generator")
        n = self.generators[0].nvars
        if any(g.nvars != n for g in self.generators):
            raise ValueError("generators must share the variable count")
        prec = INF
        for a, b in itertools.combinations(self.generators, 2):
            c = op_commutator(a, b)
            if not c.is_zero():
                raise NotCommutative(f"[{a.format()}, {b.format()}] = {c.format()}")
            prec = min(prec, c.precision)
        self.certified_precision = prec

    @property
    def nvars(self) -> int:
        return self.generators[0].nvars


@dataclass
class FiltrationTable:
    dims: List[int]
    delta: int
    veronese_d: Optional[int]
    nvars: int
    pieces: Dict[int, List[Poly]] = field(default_factory=dict, repr=False)

    @property
    def increments(self) -> List[int]:
        return [self.dims[0]] + [b - a for a, b in zip(self.dims, self.dims[1:])]


@dataclass
class SpectralReport:
    nvars: int
    symbol_condition: bool
    symbol_condition_method: str
    jacobian_nonzero: bool
    dims: List[int]
    delta: int
    veronese_d: Optional[int]
    leading_coeff: Fraction
    self_intersection: Fraction
    ba_rank: Fraction
    rank_times_index: Fraction
    rees_degrees: List[Tuple[Poly, int]]
    trdeg: int
    certified_precision: object
    data_rank: Optional[int] = None
    coherent: Optional[bool] = None

    def to_json(self) -> dict:
        from .algebra import scalar_to_json

        names = [f"xi{i + 1}" for i in range(self.nvars)]
        return {
            "symbol_condition": self.symbol_condition,
            "symbol_condition_method": self.symbol_condition_method,
            "jacobian_nonzero": self.jacobian_nonzero,
            "dims": self.dims,
            "delta": self.delta,
            "veronese_d": self.veronese_d,
            "leading_coeff": scalar_to_json(self.leading_coeff),
            "self_intersection": scalar_to_json(self.self_intersection),
            "ba_rank": scalar_to_json(self.ba_rank),
            "rank_times_index": scalar_to_json(self.rank_times_index),
            "rees_generators": [{"symbol": p.format(names), "degree": d} for p, d in self.rees_degrees],
            "trdeg": self.trdeg,
            "commutators_certified_mod": None if self.certified_precision == INF else self.certified_precision,
            "data_rank": self.data_rank,
            "coherent": self.coherent,
        }


def _as_symbols(ops) -> List[Poly]:
    out = []
    for P in ops:
        if isinstance(P, Poly):
            out.append(P)
        else:
            out.append(constant_symbol(P))
    return out


# ---------------------------------------------------------------------------
# symbol conditions
# ---------------------------------------------------------------------------


def _binary_coeffs(f: Poly, d: int) -> List[Fraction]:
    # coefficient of xi1^(d-i) xi2^i
    return [f.coeff((d - i, i)) for i in range(d + 1)]


def binary_resultant(f: Poly, g: Poly) -> Fraction:
    """Resultant of two binary forms with their formal degrees (Sylvester matrix)."""
    if not (f.is_homogeneous() and g.is_homogeneous()):
        raise ValueError("binary forms must be homogeneous")
    m, n = f.degree(), g.degree()
    if m < 0 or n < 0:
        return Fraction(0)
    a = _binary_coeffs(f, m)
    b = _binary_coeffs(g, n)
    size = m + n
    if size == 0:
        return Fraction(1)
    rows = []
    for i in range(n):
        rows.append([Fraction(0)] * i + a + [Fraction(0)] * (size - m - 1 - i))
    for i in range(m):
        rows.append([Fraction(0)] * i + b + [Fraction(0)] * (size - n - 1 - i))
    return det(rows)


def _monomials_of_degree(n: int, d: int):
    if n == 1:
        yield (d,)
        return
    for k in range(d, -1, -1):
        for rest in _monomials_of_degree(n - 1, d - k):
            yield (k,) + rest


_PRIMES = [1000003, 1000033, 1000037, 1000039, 1000081, 1000099, 1000117, 1000121]


def macaulay_condition(forms: Sequence[Poly], trials: int = 3, seed: int = 0) -> Tuple[bool, str]:
    """Decide whether n forms in n variables have only the trivial common zero.

    The degree-D Macaulay matrix, D = sum(d_i - 1) + 1, has full column rank
    exactly when no nontrivial common zero exists.  Ranks are first taken
    modulo random large primes (full rank there proves full rank over Q); only
    when every prime falls short is the rank computed over Q.
    """
    n = forms[0].nvars
    degs = [f.degree() for f in forms]
    if any(d <= 0 for d in degs):
        return (any(d == 0 for d in degs), "degenerate")
    D = sum(d - 1 for d in degs) + 1
    cols = list(_monomials_of_degree(n, D))
    index = {c: i for i, c in enumerate(cols)}
    rows = []
    for f, d in zip(forms, degs):
        for mu in _monomials_of_degree(n, D - d):
            row = [Fraction(0)] * len(cols)
            for e, c in f.terms.items():
                row[index[tuple(a + b for a, b in zip(e, mu))]] = c
            rows.append(row)
    lcm = 1
    for row in rows:
        for c in row:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    int_rows = [[int(c * lcm) for c in row] for row in rows]
    rng = random.Random(seed)
    for p in rng.sample(_PRIMES, min(trials, len(_PRIMES))):
        if rank_mod_p(int_rows, p) == len(cols):
            return True, f"macaulay rank full modulo {p}"
    e = Echelon()
    for row in rows:
        e.add({i: c for i, c in enumerate(row) if c})
    full = len(e) == len(cols)
    return full, "macaulay rank over Q"


def check_symbol_condition(ops, seed: int = 0) -> bool:
    return symbol_condition_detail(ops, seed)[0]


def symbol_condition_detail(ops, seed: int = 0) -> Tuple[bool, str]:
    """True iff the constant symbols have no common projective zero."""
    forms = _as_symbols(ops)
    n = forms[0].nvars
    if len(forms) != n:
        raise ValueError(f"need exactly {n} symbols, got {len(forms)}")
    if any(f.is_zero() for f in forms):
        return False, "zero symbol"
    if n == 1:
        return True, "single variable"
    if n == 2:
        return binary_resultant(forms[0], forms[1]) != 0, "binary resultant"
    return macaulay_condition(forms, seed=seed)


def poly_det(m: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a small polynomial matrix by Laplace expansion."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = Poly.zero(m[0][0].nvars)
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * poly_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def jacobian(forms: Sequence[Poly]) -> List[List[Poly]]:
    n = forms[0].nvars
    return [[f.diff(j) for j in range(n)] for f in forms]


def jacobian_nonzero(ops) -> bool:
    forms = _as_symbols(ops)
    if len(forms) != forms[0].nvars:
        raise ValueError("need as many symbols as variables")
    return not poly_det(jacobian(forms)).is_zero()


def transcendence_degree(forms: Sequence[Poly], samples: int = 5, seed: int = 0) -> int:
    """Generic rank of the Jacobian of the given polynomials."""
    if not forms:
        return 0
    n = forms[0].nvars
    J = jacobian(forms)
    rng = random.Random(seed)
    best = 0
    for _ in range(samples):
        pt = [Fraction(rng.randint(-97, 97)) for _ in range(n)]
        e = Echelon()
        for row in J:
            e.add({j: p.evaluate(pt) for j, p in enumerate(row) if p.evaluate(pt)})
        best = max(best, len(e))
    return best


# ---------------------------------------------------------------------------
# filtrations
# ---------------------------------------------------------------------------


def _vec(p: Poly):
    return p.terms


def graded_pieces(symbols: Sequence[Poly], m_max: int, budget: int = 200000) -> Dict[int, List[Poly]]:
    """Echelon bases of gr_j, the span of generator monomials of weighted degree j."""
    weights = [s.degree() for s in symbols]
    if any(w <= 0 for w in weights):
        raise ValueError("generators of order zero do not contribute to the filtration")
    n = symbols[0].nvars
    cache = MonomialCache(symbols, Poly.one(n), lambda a, b: a * b, budget)
    pieces: Dict[int, List[Poly]] = {0: [Poly.one(n)]}
    for j in range(1, m_max + 1):
        e = Echelon()
        for ex in weighted_exponents(weights, j):
            e.add(cache.get(ex).terms)
        pieces[j] = [Poly(n, v) for v in e.basis()]
    return pieces


def veronese_degree(pieces: Dict[int, List[Poly]], m_max: int, d_max: int = 6) -> Optional[int]:
    """Least d <= d_max such that every gr_J (J <= m_max) is spanned by
    products of at most ceil(J/d) factors taken from gr_1..gr_d."""
    for d in range(1, d_max + 1):
        if _veronese_ok(pieces, m_max, d):
            return d
    return None


def _veronese_ok(pieces, m_max: int, d: int) -> bool:
    n = pieces[0][0].nvars
    reach: Dict[int, Echelon] = {0: Echelon()}
    reach[0].add(Poly.one(n).terms)
    k = 0
    while k * d < m_max:
        k += 1
        new: Dict[int, Echelon] = {}
        for J in range(0, min(k * d, m_max) + 1):
            e = Echelon()
            if J in reach:
                for v in reach[J].basis():
                    e.add(v)
            for j in range(1, min(d, J) + 1):
                if J - j not in reach:
                    continue
                for a in reach[J - j].basis():
                    pa = Poly(n, a)
                    for b in pieces[j]:
                        e.add((pa * b).terms)
            new[J] = e
        reach = new
        lo = (k - 1) * d + 1
        for J in range(lo, min(k * d, m_max) + 1):
            if len(reach[J]) != len(pieces[J]):
                return False
    return True


def graded_dims(B, m_max: int, d_max: int = 6, veronese_max: Optional[int] = None, budget: int = 200000, check_condition: bool = True) -> FiltrationTable:
    """dim B_m for m <= m_max together with delta and the Veronese degree."""
    gens = B.generators if isinstance(B, RingPresentation) else B
    symbols = _as_symbols(gens)
    n = symbols[0].nvars
    if check_condition and len(symbols) == n and not check_symbol_condition(symbols):
        raise SymbolConditionFailed("the constant symbols share a projective zero")
    pieces = graded_pieces(symbols, m_max, budget)
    dims = []
    total = 0
    for j in range(m_max + 1):
        total += len(pieces[j])
        dims.append(total)
    jumps = [j for j in range(1, m_max + 1) if pieces[j]]
    delta = reduce(math.gcd, jumps, 0)
    vmax = min(m_max, 16) if veronese_max is None else min(m_max, veronese_max)
    vd = veronese_degree(pieces, vmax, d_max)
    return FiltrationTable(dims, delta, vd, n, pieces)


def hilbert_leading(table, window: Tuple[int, int], n: Optional[int] = None, period: Optional[int] = None, max_period: int = 12) -> Fraction:
    """Exact leading coefficient c of dims[m] ~ c m^n, by n-th finite
    differences along residue classes modulo the period."""
    if isinstance(table, FiltrationTable):
        dims = table.dims
        if n is None:
            n = table.nvars
        if period is None and table.veronese_d is not None and table.delta:
            period = table.delta * table.veronese_d
    else:
        dims = list(table)
    if n is None:
        raise ValueError("dimension n is required for a bare list")
    lo, hi = window
    if hi >= len(dims) or lo < 0 or hi <= lo:
        raise ValueError(f"window {window} outside the table of length {len(dims)}")
    periods = [period] if period else range(1, max_period + 1)
    reason = "no period tried"
    for p in periods:
        c, reason = _fit(dims, lo, hi, n, p)
        if c is not None:
            return c
    raise NotStabilized(f"no stable leading coefficient on [{lo}, {hi}]: {reason}")


def _fit(dims, lo, hi, n, p):
    values = set()
    for rho in range(p):
        start = lo + ((rho - lo) % p)
        seq = [dims[m] for m in range(start, hi + 1, p)]
        if len(seq) < n + 2:
            return None, f"period {p}: class {rho} has {len(seq)} points, need {n + 2}"
        for _ in range(n):
            seq = [b - a for a, b in zip(seq, seq[1:])]
        if len(set(seq)) != 1:
            return None, f"period {p}: {n}-th differences vary in class {rho}"
        values.add(Fraction(seq[0], math.factorial(n) * p ** n))
    if len(values) != 1:
        return None, f"period {p}: classes disagree on the leading coefficient"
    return values.pop(), ""


# ---------------------------------------------------------------------------
# the module L
# ---------------------------------------------------------------------------


def l_project(P: DiffOp) -> Poly:
    """Image of P in L = D/(x_1 D + ... + x_n D) identified with k[xi]."""
    if P.precision < 1:
        raise PrecisionExhausted("constant terms of the coefficients are unknown")
    return Poly(P.nvars, {a: c.constant_term() for a, c in P.terms.items()})


def l_act(v: Poly, Q: DiffOp) -> Poly:
    """Right action of Q on L = k[xi]: f o d_j = f xi_j and g o x_i = dg/dxi_i.

    A coefficient c(x) = sum c_beta x^beta acts by sum c_beta d^beta/dxi^beta,
    so only terms with |beta| <= deg v matter.
    """
    n = v.nvars
    if v.is_zero():
        return v
    dv = v.degree()
    if Q.precision <= dv:
        raise PrecisionExhausted(f"need coefficients modulo M^{dv + 1}, have M^{Q.precision}")
    total = Poly.zero(n)
    for alpha, c in Q.terms.items():
        acted = Poly.zero(n)
        for beta, cb in c.terms.items():
            if sum(beta) > dv:
                continue
            acted = acted + v.diff_multi(beta).scale(cb)
        if not acted.is_zero():
            total = total + acted * Poly.monomial(alpha)
    return total


def l_filtration_dims(n: int, m_max: int) -> List[int]:
    """dim L_m, L_m the image of D_m, spanned by 1 o (d^alpha x^beta) with |alpha| <= m."""
    one = Poly.one(n)
    dims = []
    e = Echelon()
    for m in range(m_max + 1):
        for alpha in _monomials_of_degree(n, m):
            for b in range(m + 1):
                for beta in _monomials_of_degree(n, b):
                    op = op_mul(DiffOp(n, {alpha: Poly.one(n)}), DiffOp(n, {(0,) * n: Poly.monomial(beta)}))
                    e.add(l_act(one, op).terms)
        dims.append(len(e))
    return dims


# ---------------------------------------------------------------------------
# composites
# ---------------------------------------------------------------------------


def self_intersection(B, window: Tuple[int, int] = (20, 40), table: Optional[FiltrationTable] = None) -> Tuple[Fraction, Fraction]:
    """(C^n) = n! * leading coefficient of dim B_m, with rk L = 1/(C^n)."""
    if table is None:
        table = graded_dims(B, window[1])
    c = hilbert_leading(table, window)
    ci = math.factorial(table.nvars) * c
    return ci, 1 / ci


def ba_rank(table: FiltrationTable, window: Tuple[int, int], l_max: int = 10) -> Fraction:
    """Rank of L over B: ratio of the leading coefficients of dim L_m and dim B_m."""
    n = table.nvars
    ldims = l_filtration_dims(n, l_max)
    cl = hilbert_leading(ldims, (max(0, l_max - n - 3), l_max), n=n, period=1)
    return cl / hilbert_leading(table, window)


def rees_generator_degrees(B) -> List[Tuple[Poly, int]]:
    """Minimal homogeneous generators of gr(B) among the generator symbols, in input order."""
    gens = B.generators if isinstance(B, RingPresentation) else B
    symbols = _as_symbols(gens)
    degrees = [s.degree() for s in symbols]
    n = symbols[0].nvars
    keep = minimal_generators(symbols, degrees, Poly.one(n), lambda a, b: a * b, _vec)
    return [(symbols[i], degrees[i]) for i in keep]


def check_embedding(B: RingPresentation, m_max: int) -> bool:
    """No nonzero combination of operator monomials of order j maps to zero in k[xi].

    Compares the rank of the full symbols (with x-dependence) against the rank
    of their images for each j <= m_max.
    """
    gens = B.generators
    n = B.nvars
    orders = [order_of(g) for g in gens]
    cache = MonomialCache(gens, DiffOp.scalar(n, 1), op_mul)
    for j in range(1, m_max + 1):
        full = Echelon()
        img = Echelon()
        for ex in weighted_exponents(orders, j):
            op = cache.get(ex)
            s = principal_symbol(op, degree=j)
            full.add({(a, e): c for a, ts in s.coeffs.items() for e, c in ts.body.terms.items()})
            img.add(symbol_image(s).terms)
        if len(full) != len(img):
            return False
    return True


def analyze_ring(B, mmax: int = 40, window: Optional[Tuple[int, int]] = None, data_rank: Optional[int] = None, seed: int = 0, l_max: int = 10, d_max: int = 6) -> SpectralReport:
    if not isinstance(B, RingPresentation):
        B = RingPresentation(list(B))
    symbols = _as_symbols(B.generators)
    n = B.nvars
    if len(symbols) == n:
        cond, method = symbol_condition_detail(symbols, seed)
        jac = jacobian_nonzero(symbols)
    else:
        # more generators than variables: condition on the first n
        cond, method = symbol_condition_detail(symbols[:n], seed)
        method += " (first n generators)"
        jac = jacobian_nonzero(symbols[:n])
    if not cond:
        raise SymbolConditionFailed("the constant symbols share a projective zero")
    if window is None:
        window = (mmax // 2, mmax)
    table = graded_dims(symbols, mmax, d_max=d_max, check_condition=False)
    c = hilbert_leading(table, window)
    ci = math.factorial(n) * c
    rk = ba_rank(table, window, l_max)
    report = SpectralReport(
        nvars=n,
        symbol_condition=cond,
        symbol_condition_method=method,
        jacobian_nonzero=jac,
        dims=table.dims,
        delta=table.delta,
        veronese_d=table.veronese_d,
        leading_coeff=c,
        self_intersection=ci,
        ba_rank=rk,
        rank_times_index=rk * ci,
        rees_degrees=rees_generator_degrees(symbols),
        trdeg=transcendence_degree(symbols, seed=seed),
        certified_precision=B.certified_precision,
    )
    if data_rank is not None:
        report.data_rank = data_rank
        report.coherent = ci == data_rank
    return report


# ---------------------------------------------------------------------------
# constant-symbol harness
# ---------------------------------------------------------------------------


def conjugate(P: DiffOp, g: TruncatedSeries) -> DiffOp:
    """e^{-g} P e^{g} modulo the precision of g, minus what P's order costs."""
    eg = DiffOp.mult(series_exp(g))
    emg = DiffOp.mult(series_exp(-g))
    return op_mul(emg, op_mul(P, eg))


@dataclass
class HarnessCase:
    P1: DiffOp
    P2: DiffOp
    Q: DiffOp
    commute_precision: object
    jacobian_nonzero: bool
    symbol_constant: bool


def _random_form(rng: random.Random, n: int, d: int) -> Poly:
    terms = {e: rng.randint(-3, 3) for e in _monomials_of_degree(n, d)}
    return Poly(n, terms)


def _random_cc_operator(rng: random.Random, n: int, top: Poly) -> DiffOp:
    """Constant-coefficient operator with the given top form plus random lower-order terms."""
    p = top
    for d in range(top.degree()):
        p = p + _random_form(rng, n, d)
    return DiffOp.from_symbol_poly(p)


def constant_symbol_case(rng: random.Random, precision: int = 6, conjugated: bool = True) -> HarnessCase:
    """Random constant-symbol Jacobian-nonzero pair with a commuting Q.

    Constant-coefficient operators commute; conjugating all three by e^g for a
    random g in M keeps them commuting and keeps the symbols constant while
    giving the lower-order terms genuine x-dependence.
    """
    n = 2
    while True:
        f1 = _random_form(rng, n, rng.randint(1, 2))
        f2 = _random_form(rng, n, rng.randint(1, 2))
        if f1.is_zero() or f2.is_zero():
            continue
        if not poly_det(jacobian([f1, f2])).is_zero():
            break
    fq = Poly.zero(n)
    while fq.is_zero():
        fq = _random_form(rng, n, rng.randint(1, 2))
    P1 = _random_cc_operator(rng, n, f1)
    P2 = _random_cc_operator(rng, n, f2)
    Q = _random_cc_operator(rng, n, fq)
    if conjugated:
        g = Poly.zero(n)
        while g.is_zero():
            g = Poly(n, {e: rng.randint(-2, 2) for d in (1, 2) for e in _monomials_of_degree(n, d)})
        gs = TruncatedSeries(g, precision)
        P1, P2, Q = (conjugate(X, gs) for X in (P1, P2, Q))
    c1 = op_commutator(P1, Q)
    c2 = op_commutator(P2, Q)
    if not (c1.is_zero() and c2.is_zero()):
        raise NotCommutative("harness operators failed to commute")
    s1, s2 = principal_symbol(P1), principal_symbol(P2)
    if not (s1.is_constant() and s2.is_constant()):
        raise NonConstantSymbol("harness generators lost constant symbols")
    jac = jacobian_nonzero([symbol_image(s1), symbol_image(s2)])
    sq = principal_symbol(Q)
    return HarnessCase(P1, P2, Q, min(c1.precision, c2.precision), jac, sq.is_constant())
