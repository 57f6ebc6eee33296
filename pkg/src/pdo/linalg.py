"""Exact sparse linear algebra over Q.

Vectors are dicts from hashable keys to Fractions.  An ``Echelon`` keeps a
basis in which each vector has a distinct pivot, the pivot being the smallest
key under a caller-supplied sort key.  With the (t-level, u-degree) key this is
exactly a valuation-adapted basis.
"""

from __future__ import annotations

import heapq
import itertools
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

Vector = Dict[Hashable, Fraction]


def _identity(k):
    return k


class Echelon:
    def __init__(self, key: Callable = _identity):
        self.key = key
        self.pivots: Dict[Hashable, Vector] = {}
        self.order: List[Hashable] = []

    def __len__(self) -> int:
        return len(self.pivots)

    def _lead(self, v: Vector):
        return min(v, key=self.key)

    def reduce(self, v: Vector) -> Vector:
        """Full normal form of v modulo the span."""
        v = {k: c for k, c in v.items() if c}
        key = self.key
        counter = itertools.count()
        heap = [(key(k), next(counter), k) for k in v]
        heapq.heapify(heap)
        seen = set()
        while heap:
            _, _, k = heapq.heappop(heap)
            if k in seen:
                continue
            seen.add(k)
            c = v.get(k)
            if not c or k not in self.pivots:
                continue
            for kk, cc in self.pivots[k].items():
                nv = v.get(kk, 0) - c * cc
                if nv:
                    if kk not in v and kk not in seen:
                        heapq.heappush(heap, (key(kk), next(counter), kk))
                    v[kk] = nv
                else:
                    v.pop(kk, None)
        return v

    def contains(self, v: Vector) -> bool:
        return not self.reduce(v)

    def add(self, v: Vector) -> Optional[Hashable]:
        """Insert v; return its new pivot, or None if v was already in the span."""
        r = self.reduce(v)
        if not r:
            return None
        p = self._lead(r)
        c = r[p]
        r = {k: x / c for k, x in r.items()}
        self.pivots[p] = r
        self.order.append(p)
        return p

    def basis(self) -> List[Vector]:
        return [self.pivots[p] for p in sorted(self.pivots, key=self.key)]

    def pivot_keys(self) -> List[Hashable]:
        return sorted(self.pivots, key=self.key)


def rank(vectors: Iterable[Vector], key: Callable = _identity) -> int:
    e = Echelon(key)
    for v in vectors:
        e.add(v)
    return len(e)


def kernel(vectors: Sequence[Vector], key: Callable = _identity) -> List[List[Fraction]]:
    """Basis of {c : sum c_i v_i = 0}, each as a dense coefficient list."""
    n = len(vectors)
    tag = object()

    def k2(k):
        if isinstance(k, tuple) and len(k) == 2 and k[0] is tag:
            return (1, k[1])
        return (0, key(k))

    e = Echelon(k2)
    out = []
    for i, v in enumerate(vectors):
        aug = dict(v)
        aug[(tag, i)] = Fraction(1)
        r = e.reduce(aug)
        if r and all(isinstance(k, tuple) and len(k) == 2 and k[0] is tag for k in r):
            dense = [Fraction(0)] * n
            for (_, j), c in r.items():
                dense[j] = c
            out.append(dense)
        else:
            e.add(aug)
    return out


def det(matrix: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    a = [[Fraction(x) for x in row] for row in matrix]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank of an integer matrix reduced modulo the prime p."""
    a = [[x % p for x in row] for row in rows]
    if not a:
        return 0
    ncols = len(a[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], p - 2, p)
        a[r] = [(x * inv) % p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        r += 1
        if r == len(a):
            break
    return r


def reduced_basis(e: Echelon) -> List[Vector]:
    """Fully reduced basis of an echelon (each pivot appears in exactly one vector)."""
    keys = sorted(e.pivots, key=e.key, reverse=True)
    for p in keys:
        v = e.pivots.pop(p)
        tail = {k: c for k, c in v.items() if k != p}
        e.pivots[p] = {p: Fraction(1), **e.reduce(tail)}
    return e.basis()
