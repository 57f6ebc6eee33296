"""Helpers shared by graded span computations over generator monomials."""

from __future__ import annotations

from typing import Callable, Dict, Iterator, List, Sequence, Tuple

from .errors import BudgetExceeded
from .linalg import Echelon


def weighted_exponents(weights: Sequence[int], total: int) -> Iterator[Tuple[int, ...]]:
    """All e >= 0 with sum e_i * weights_i == total (weights positive)."""
    n = len(weights)

    def rec(i: int, left: int, acc: List[int]):
        if i == n:
            if left == 0:
                yield tuple(acc)
            return
        w = weights[i]
        for e in range(left // w + 1):
            acc.append(e)
            yield from rec(i + 1, left - e * w, acc)
            acc.pop()

    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    yield from rec(0, total, [])


class MonomialCache:
    """Products of generator powers, memoized by exponent vector."""

    def __init__(self, gens: Sequence, one, mul: Callable, budget: int = 200000):
        self.gens = list(gens)
        self.one = one
        self.mul = mul
        self.budget = budget
        self.cache: Dict[Tuple[int, ...], object] = {(0,) * len(gens): one}

    def get(self, e: Tuple[int, ...]):
        v = self.cache.get(e)
        if v is not None:
            return v
        if len(self.cache) >= self.budget:
            raise BudgetExceeded(f"more than {self.budget} generator monomials")
        i = next(k for k, x in enumerate(e) if x)
        prev = list(e)
        prev[i] -= 1
        v = self.mul(self.get(tuple(prev)), self.gens[i])
        self.cache[e] = v
        return v


def minimal_generators(gens: Sequence, degrees: Sequence[int], one, mul: Callable, vec: Callable) -> List[int]:
    """Indices of a minimal homogeneous generating subset, in input order.

    Generators are visited by (degree, input position); one is kept when it is
    not in the span of monomials of the same degree in the generators kept so
    far.
    """
    order = sorted(range(len(gens)), key=lambda i: (degrees[i], i))
    kept: List[int] = []
    for i in order:
        j = degrees[i]
        span = Echelon()
        if kept:
            ws = [degrees[k] for k in kept]
            cache = MonomialCache([gens[k] for k in kept], one, mul)
            for e in weighted_exponents(ws, j):
                span.add(vec(cache.get(e)))
        if not span.contains(vec(gens[i])):
            kept.append(i)
    return sorted(kept)
