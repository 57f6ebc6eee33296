"""Subalgebras of k[x, h] and the glueing A = R + I.

Polynomials are ``Poly`` objects in two variables (x, h).  Ideal membership
uses a graded Groebner basis, so I ∩ k[x,h]_{<=D} is spanned by basis
elements times monomials of bounded degree.  Statements about R + I and about
generated subalgebras are certified degree by degree up to a budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from .algebra import Poly
from .errors import BudgetExceeded, NoConductorFound, NoNoetherPair
from .graded import MonomialCache, weighted_exponents
from .linalg import Echelon, kernel, reduced_basis

NAMES = ("x", "h")
_X, _H = sympy.symbols("x h")


def fmt(p: Poly) -> str:
    return p.format(NAMES)


def to_sympy(p: Poly) -> sympy.Poly:
    return sympy.Poly.from_dict(
        {e: sympy.Rational(c.numerator, c.denominator) for e, c in p.terms.items()} or {(0, 0): 0},
        _X, _H, domain="QQ",
    )


def from_sympy(p) -> Poly:
    if not isinstance(p, sympy.Poly):
        p = sympy.Poly(p, _X, _H, domain="QQ")
    return Poly(2, {tuple(e): Fraction(int(c.p), int(c.q)) for e, c in p.terms() if c != 0})


def monomials_upto(D: int) -> List[Tuple[int, int]]:
    """Exponents of total degree <= D, by degree then x-power descending."""
    return [(d - j, j) for d in range(D + 1) for j in range(d + 1)]


def cand_key(e: Tuple[int, int]):
    # degree first; within a degree x before h
    return (sum(e), -e[0])


def _grlex(e):
    return (sum(e), e)


def monic(p: Poly) -> Poly:
    _, c = p.leading()
    return p.scale(1 / c)


class Ideal:
    """Ideal of k[x, h] with a graded Groebner basis."""

    def __init__(self, gens: Sequence[Poly]):
        self.gens = [g for g in gens if not g.is_zero()]
        if not self.gens:
            self.basis: List[Poly] = []
        else:
            G = sympy.groebner([to_sympy(g).as_expr() for g in self.gens], _X, _H, order="grlex")
            self.basis = [from_sympy(sympy.Poly(e, _X, _H, domain="QQ")) for e in G.exprs]
            self._G = G

    def is_unit(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.basis)

    def normal_form(self, f: Poly) -> Poly:
        if not self.basis or f.is_zero():
            return f
        _, r = self._G.reduce(to_sympy(f).as_expr())
        return from_sympy(sympy.Poly(r, _X, _H, domain="QQ"))

    def contains(self, f: Poly) -> bool:
        return self.normal_form(f).is_zero()

    def span_upto(self, D: int) -> List[Poly]:
        """Spanning set of I ∩ k[x,h]_{<=D}."""
        out = []
        for g in self.basis:
            dg = g.degree()
            for e in monomials_upto(D - dg):
                out.append(g * Poly.monomial(e))
        return out


class MonomialAlgebra:
    """Subalgebra k[generators] of k[x, h]."""

    def __init__(self, generators: Sequence[Poly]):
        gens = []
        for g in generators:
            if g.nvars != 2:
                raise ValueError("generators live in k[x, h]")
            if g.is_constant():
                continue
            gens.append(g)
        self.generators = gens
        self._spans: Dict[int, Echelon] = {}

    def span(self, D: int) -> Echelon:
        """Echelon basis of the span of generator monomials of degree <= D (1 included)."""
        if D not in self._spans:
            e = Echelon(_grlex)
            for p in self.elements_upto(D):
                e.add(p.terms)
            self._spans[D] = e
        return self._spans[D]

    def elements_upto(self, D: int) -> List[Poly]:
        one = Poly.one(2)
        if not self.generators:
            return [one]
        ws = [g.degree() for g in self.generators]
        cache = MonomialCache(self.generators, one, lambda a, b: a * b)
        out = []
        for d in range(D + 1):
            for ex in weighted_exponents(ws, d):
                out.append(cache.get(ex))
        return out

    def contains(self, f: Poly, D: Optional[int] = None) -> bool:
        if D is None:
            D = max(f.degree(), 0)
        return self.span(D).contains(f.terms)

    def dims(self, D: int) -> List[int]:
        e = self.span(D)
        return [sum(1 for p in e.pivots if sum(p) <= d) for d in range(D + 1)]

    def equivalent(self, other: "MonomialAlgebra", D: int) -> bool:
        """Same degree <= D part."""
        a, b = self.span(D), other.span(D)
        return len(a) == len(b) and all(b.contains(v) for v in a.basis())

    def formatted(self) -> List[str]:
        return [fmt(g) for g in self.generators]


@dataclass
class GlueInput:
    ideal_gens: List[Poly]
    subring_gens: List[Poly]

    def __post_init__(self):
        self.ideal = Ideal(self.ideal_gens)
        if not self.ideal.gens:
            raise ValueError("the ideal must be nonzero")
        if self.ideal.is_unit():
            raise ValueError("the ideal must be proper")
        self.R = MonomialAlgebra(self.subring_gens)


def sum_space(inp: GlueInput, D: int) -> Echelon:
    """(R + I) ∩ k[x,h]_{<=D}, spanned by R-monomials and I-multiples of degree <= D."""
    e = Echelon(_grlex)
    for p in inp.R.elements_upto(D):
        e.add(p.terms)
    for p in inp.ideal.span_upto(D):
        e.add(p.terms)
    return e


def glued_membership(f: Poly, inp: GlueInput, D: Optional[int] = None) -> bool:
    """f ∈ R + I: the normal form of f mod I lies in the span of normal forms of R-monomials."""
    if D is None:
        D = max(f.degree(), 0)
    nf = inp.ideal.normal_form(f)
    if nf.is_zero():
        return True
    e = Echelon(_grlex)
    for p in inp.R.elements_upto(D):
        e.add(inp.ideal.normal_form(p).terms)
    return e.contains(nf.terms)


@dataclass
class MonicCertificate:
    f1: Poly
    f2: Poly
    k: int
    coeffs: List[Poly]
    b: Poly

    def check(self, inp: GlueInput) -> bool:
        lhs = self.f2 ** self.k
        for i, a in enumerate(self.coeffs, start=1):
            lhs = lhs + a * self.f2 ** (self.k - i)
        return lhs == self.b and inp.ideal.contains(self.b) and inp.ideal.contains(self.f1)

    def to_json(self) -> dict:
        return {
            "f1": fmt(self.f1),
            "f2": fmt(self.f2),
            "k": self.k,
            "coefficients": [fmt(a) for a in self.coeffs],
            "b": fmt(self.b),
        }


@dataclass
class GlueResult:
    algebra: MonomialAlgebra
    certificate: MonicCertificate
    base_generators: List[Poly]
    saturation_added: List[Poly]
    budget: int
    notes: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "generators": self.algebra.formatted(),
            "certificate": self.certificate.to_json(),
            "base_generators": [fmt(p) for p in self.base_generators],
            "saturation_added": [fmt(p) for p in self.saturation_added],
            "budget": self.budget,
            "saturated_to_degree": self.budget,
            "notes": self.notes,
        }


def _leading_form(p: Poly) -> Poly:
    return p.homogeneous_part(p.degree())


def noether_pair(inp: GlueInput) -> Tuple[Poly, Poly]:
    """(f1 in I, f2) with k[x,h] finite over k[f1, f2].

    Finiteness is certified by the leading forms having no common projective
    zero (nonzero resultant): then x and h are integral over k[f1, f2].
    """
    from .spectral import binary_resultant

    x, h = Poly.var(2, 0), Poly.var(2, 1)
    f2s = [x, h, x + h, x - h]
    f1s = list(inp.ideal.gens) + [g for g in inp.ideal.basis if g not in inp.ideal.gens]
    for f1 in f1s:
        for f2 in f2s:
            if binary_resultant(_leading_form(f1), _leading_form(f2)) != 0:
                return f1, f2
    raise NoNoetherPair("no pair (f1 in I, f2 in {x, h, x+h, x-h}) with coprime leading forms")


def monic_relation(inp: GlueInput, f1: Poly, f2: Poly, budget: int) -> MonicCertificate:
    """f2^k + a1 f2^(k-1) + ... + ak = b ∈ I with each a_i in R of degree <= budget."""
    R_elems = inp.R.elements_upto(budget)
    for k in range(1, budget + 1):
        cols: List[Poly] = []
        tags: List[Tuple[int, Poly]] = []
        for i in range(1, k + 1):
            p = f2 ** (k - i)
            for r in R_elems:
                cols.append(r * p)
                tags.append((i, r))
        target = f2 ** k
        vecs = [inp.ideal.normal_form(c).terms for c in cols]
        vecs.append(inp.ideal.normal_form(target).terms)
        for sol in kernel(vecs, _grlex):
            if sol[-1] == 0:
                continue
            sol = [c / sol[-1] for c in sol]
            coeffs = [Poly.zero(2) for _ in range(k)]
            for (i, r), c in zip(tags, sol):
                if c:
                    coeffs[i - 1] = coeffs[i - 1] + r.scale(c)
            b = target
            for i, a in enumerate(coeffs, start=1):
                b = b + a * f2 ** (k - i)
            return MonicCertificate(f1, f2, k, coeffs, b)
    raise BudgetExceeded(f"no monic relation of degree <= {budget} over R modulo I")


def glue_affine(inp: GlueInput, budget: int = 10) -> GlueResult:
    """Finite generators of R + I: the Noether-pair subalgebra, saturated up to ``budget``."""
    f1, f2 = noether_pair(inp)
    cert = monic_relation(inp, f1, f2, budget)
    base: List[Poly] = []
    for g in [f1] + cert.coeffs + [cert.b]:
        if g.is_zero() or g.is_constant():
            continue
        g = monic(g)
        if g not in base:
            base.append(g)
    gens = list(base)
    added: List[Poly] = []
    for d in range(1, budget + 1):
        A = MonomialAlgebra(gens)
        span = A.span(d)
        target = sum_space(inp, d)
        cand = [Poly(2, v) for v in reduced_basis(target)]
        cand = [c for c in cand if c.degree() == d]
        cand.sort(key=lambda p: cand_key(p.leading()[0]))
        for c in cand:
            if not span.contains(c.terms):
                c = monic(c)
                gens.append(c)
                added.append(c)
                span.add(c.terms)
    gens = _prune(gens, budget)
    gens.sort(key=lambda p: (p.degree(), cand_key(p.leading()[0])))
    notes = [
        f"generation of R + I certified degree by degree up to {budget}",
        "saturation beyond the Noether-pair subalgebra is added to reach R + I",
    ]
    return GlueResult(MonomialAlgebra(gens), cert, base, added, budget, notes)


def _prune(gens: List[Poly], D: int) -> List[Poly]:
    """Drop generators lying in the algebra generated by the others (checked up to D)."""
    out = list(gens)
    for g in sorted(gens, key=lambda p: (-p.degree(), [-x for x in cand_key(p.leading()[0])])):
        rest = [x for x in out if x is not g]
        if MonomialAlgebra(rest).contains(g, max(g.degree(), 0)):
            out = rest
    return out


def check_glue(result: GlueResult, inp: GlueInput) -> bool:
    """Two-sided containment up to the budget: generators lie in R + I and (R + I)_{<=D} lies in A."""
    D = result.budget
    if not all(glued_membership(g, inp, max(D, g.degree())) for g in result.algebra.generators):
        return False
    span = result.algebra.span(D)
    return all(span.contains(v) for v in sum_space(inp, D).basis())


# ---------------------------------------------------------------------------
# conductor
# ---------------------------------------------------------------------------


def conductor(A: MonomialAlgebra, budget: int = 10) -> List[Poly]:
    """Minimal generators of {f : f k[x,h] ⊆ A}, tested for deg f <= budget // 2 against A_{<=budget}."""
    e_max = budget // 2
    span = A.span(budget)
    cand = monomials_upto(e_max)
    vecs = []
    for nu in cand:
        v = {}
        for mu in monomials_upto(budget - e_max):
            prod = Poly.monomial((nu[0] + mu[0], nu[1] + mu[1]))
            r = span.reduce(prod.terms)
            for key, c in r.items():
                v[(mu, key)] = c
        vecs.append(v)
    ker = kernel(vecs, lambda k: (_grlex(k[0]), _grlex(k[1])))
    if not ker:
        raise NoConductorFound(f"no conductor element of degree <= {e_max} within budget {budget}")
    elems = []
    for sol in ker:
        elems.append(Poly(2, {nu: c for nu, c in zip(cand, sol) if c}))
    K = Echelon(_grlex)
    for p in elems:
        K.add(p.terms)
    basis = [Poly(2, v) for v in reduced_basis(K)]
    basis.sort(key=lambda p: (p.degree(), cand_key(p.leading()[0])))
    return minimal_ideal_generators(basis, e_max)


def minimal_ideal_generators(polys: Sequence[Poly], D: int) -> List[Poly]:
    kept: List[Poly] = []
    for p in polys:
        e = Echelon(_grlex)
        for g in kept:
            for mu in monomials_upto(D - g.degree()):
                e.add((g * Poly.monomial(mu)).terms)
        if not e.contains(p.terms):
            kept.append(monic(p))
    return kept
