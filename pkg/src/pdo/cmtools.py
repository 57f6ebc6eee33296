"""Cycle map via valuations along curves, and the S2 closure of subalgebras of k[x, h]."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy

from .algebra import Poly
from .errors import BudgetExceeded, ZeroInput
from .glue import MonomialAlgebra, cand_key, fmt, monomials_upto, to_sympy
from .linalg import Echelon, kernel


def _grlex(e):
    return (sum(e), e)


@dataclass
class CurveLocalization:
    """A height-one prime (p) of k[x, h]; linear p are irreducible, others must be asserted."""

    prime: Poly
    assume_irreducible: bool = False

    def __post_init__(self):
        if self.prime.is_constant():
            raise ValueError("a prime must be nonconstant")
        if self.prime.degree() > 1 and not self.assume_irreducible:
            raise ValueError(f"cannot certify irreducibility of {fmt(self.prime)}; pass assume_irreducible")


def _as_loc(p) -> CurveLocalization:
    return p if isinstance(p, CurveLocalization) else CurveLocalization(p)


def valuation(f: Poly, p: Poly) -> int:
    """Largest k with p^k dividing f."""
    if f.is_zero():
        raise ZeroInput("valuation of zero")
    k = 0
    while True:
        q = f.exact_div(p)
        if q is None:
            return k
        f = q
        k += 1


def ord_along(num: Poly, den: Poly, loc) -> int:
    """Order of num/den along the prime: ord_p(num) - ord_p(den)."""
    loc = _as_loc(loc)
    if num.is_zero() or den.is_zero():
        raise ZeroInput("numerator and denominator must be nonzero")
    return valuation(num, loc.prime) - valuation(den, loc.prime)


@dataclass
class WeilCycle:
    components: List[Tuple[Poly, int]]

    def to_json(self) -> dict:
        return {"components": [{"prime": fmt(p), "multiplicity": m} for p, m in self.components]}

    def format(self) -> str:
        if not self.components:
            return "0"
        return " + ".join(f"{m}*({fmt(p)})" for p, m in self.components).replace("+ -", "- ")


def cycle_of(num: Poly, den: Poly, primes: Sequence) -> WeilCycle:
    comps = []
    for p in primes:
        loc = _as_loc(p)
        m = ord_along(num, den, loc)
        if m:
            comps.append((loc.prime, m))
    return WeilCycle(comps)


# ---------------------------------------------------------------------------
# S2 closure
# ---------------------------------------------------------------------------


def colon_elements(A: MonomialAlgebra, z: Poly, budget: int) -> List[Poly]:
    """Basis of J_z = {s ∈ A : s z ∈ A}, for deg s <= budget - deg z."""
    D = budget - z.degree()
    if D < 0:
        return []
    S = A.span(D)
    big = A.span(budget)
    basis = [Poly(2, v) for v in S.basis()]
    vecs = [big.reduce((s * z).terms) for s in basis]
    out = []
    for sol in kernel(vecs, _grlex):
        p = Poly.zero(2)
        for s, c in zip(basis, sol):
            if c:
                p = p + s.scale(c)
        out.append(p)
    return out


def coprime_pair(elems: Sequence[Poly], seed: int = 0, tries: int = 20) -> Optional[Tuple[Poly, Poly]]:
    """Two elements of the span with no common factor in k[x, h], if found."""
    elems = [e for e in elems if not e.is_zero()]
    if not elems:
        return None
    sp = [to_sympy(e) for e in elems]
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            if sympy.gcd(sp[i], sp[j]).total_degree() == 0:
                return elems[i], elems[j]
    g = sp[0]
    for s in sp[1:]:
        g = sympy.gcd(g, s)
    if g.total_degree() > 0:
        return None
    rng = random.Random(seed)
    for _ in range(tries):
        a = sum((e.scale(rng.randint(-5, 5)) for e in elems), Poly.zero(2))
        b = sum((e.scale(rng.randint(-5, 5)) for e in elems), Poly.zero(2))
        if a.is_zero() or b.is_zero():
            continue
        if sympy.gcd(to_sympy(a), to_sympy(b)).total_degree() == 0:
            return a, b
    return None


@dataclass
class ClosureStep:
    element: Poly
    witness: Tuple[Poly, Poly]

    def to_json(self) -> dict:
        return {"adjoined": fmt(self.element), "regular_pair": [fmt(self.witness[0]), fmt(self.witness[1])]}


@dataclass
class ClosureResult:
    algebra: MonomialAlgebra
    trace: List[ClosureStep]
    budget: int

    def to_json(self) -> dict:
        return {
            "closure_generators": self.algebra.formatted(),
            "trace": [s.to_json() for s in self.trace],
            "budget": self.budget,
        }


def s2_candidates(A: MonomialAlgebra, D: int) -> List[Poly]:
    """Monomials of degree <= D outside A, degree first and x before h."""
    span = A.span(D)
    out = [Poly.monomial(e) for e in monomials_upto(D)]
    out = [m for m in out if not span.contains(m.terms)]
    out.sort(key=lambda m: cand_key(next(iter(m.terms))))
    return out


def s2_closure(A: MonomialAlgebra, budget: int = 12, max_steps: int = 64, seed: int = 0) -> ClosureResult:
    """Adjoin z whenever {s ∈ A : s z ∈ A} contains two coprime elements; iterate to a fixpoint.

    Candidates have degree <= budget // 2 so the colon ideal is explored in
    degrees up to budget - deg z.
    """
    gens = list(A.generators)
    trace: List[ClosureStep] = []
    while True:
        cur = MonomialAlgebra(gens)
        adjoined = False
        for z in s2_candidates(cur, budget // 2):
            J = colon_elements(cur, z, budget)
            pair = coprime_pair(J, seed)
            if pair is not None:
                gens.append(z)
                trace.append(ClosureStep(z, pair))
                adjoined = True
                break
        if not adjoined:
            return ClosureResult(MonomialAlgebra(_prune(gens, budget)), trace, budget)
        if len(trace) >= max_steps:
            raise BudgetExceeded(f"closure did not stabilize within {max_steps} adjunctions")


def _prune(gens: List[Poly], D: int) -> List[Poly]:
    from .glue import _prune as prune

    out = prune(gens, D)
    out.sort(key=lambda p: (p.degree(), cand_key(p.leading()[0])))
    return out


def is_cm(A: MonomialAlgebra, budget: int = 12) -> bool:
    """A equals its S2 closure up to the budget."""
    return not s2_closure(A, budget).trace
