"""Subspaces of k[[u]]((t)) and their t-adic filtrations.

A subspace S comes with a filtration S_n = S ∩ t^(-n r) k[[u]][[t]].  Every
computation builds a valuation-adapted basis of a finite piece S_L: its pivots
are exactly the values nu(S_L \\ 0), so dim S_n counts pivots with t-level
>= -n r.

Coefficients are trusted only inside the common window of all spanning
elements (conservative windows shrink under multiplication).  The window used
is reported with each result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import UTLaurent, Window, ut_mul, ut_valuation
from .errors import BudgetExceeded, CoordinateMismatch, NoRankFits, WindowOverflow, WindowTooSmall
from .graded import MonomialCache, minimal_generators, weighted_exponents
from .linalg import Echelon, reduced_basis


def _lvl_key(k):
    # vectors are keyed (l, m); the pivot (least key) is the valuation
    return k


def psi_map(f: UTLaurent) -> UTLaurent:
    """u^m t^l -> z1^-m z2^(l+m)."""
    if f.coords != "ut":
        raise CoordinateMismatch("psi expects (u, t) coordinates")
    return UTLaurent({(m, l + m): c for (m, l), c in f.terms.items()}, f.window, "z", clip=False)


def psi1_map(f: UTLaurent) -> UTLaurent:
    """z2 -> t, z1^-1 -> u t^-1."""
    if f.coords != "z":
        raise CoordinateMismatch("psi1 expects z coordinates")
    return UTLaurent({(a, b - a): c for (a, b), c in f.terms.items()}, f.window, "ut", clip=False)


def z_leading_operator(f: UTLaurent) -> Dict[Tuple[int, int], Fraction]:
    """Read z1^-a z2^-b as d1^a d2^b; returns {(a, b): c} for the terms with b <= 0."""
    if f.coords != "z":
        raise CoordinateMismatch("expects z coordinates")
    return {(a, -b): c for (a, b), c in f.terms.items() if b <= 0}


@dataclass
class SubspaceUT:
    """A subspace of k[[u]]((t)).

    kind "algebra": the unital algebra generated by ``generators`` (each with
    negative t-valuation).  kind "module": the k-span of ``generators``, or
    their A-span when ``over`` is an algebra, or the monomial family of
    ``rule`` plus its extra elements.

    Triangle rule params: {u^j t^-i : i >= start, i = start mod step,
    0 <= j <= slope*i} together with the elements listed in ``extra``.
    """

    kind: str
    generators: List[UTLaurent]
    window: Window
    rule: Optional[dict] = None
    over: Optional["SubspaceUT"] = None
    extra_degree: int = 0
    budget: int = 100000

    def __post_init__(self):
        if self.kind not in ("algebra", "module"):
            raise ValueError(f"unknown subspace kind {self.kind!r}")
        if self.kind == "algebra":
            if self.rule is not None:
                raise ValueError("algebras are given by generators")
            for g in self.generators:
                if g.is_zero() or ut_valuation(g)[1] >= 0:
                    raise ValueError("algebra generators need negative t-valuation")
        if self.rule is not None:
            if self.rule.get("type") != "triangle":
                raise ValueError(f"unsupported rule {self.rule.get('type')!r}")

    def weights(self, r: int = 1) -> List[Fraction]:
        return [Fraction(-ut_valuation(g)[1], r) for g in self.generators]

    # serialization -----------------------------------------------------------
    def to_json(self) -> dict:
        d = {
            "kind": self.kind,
            "window": self.window.to_json(),
            "generators": [g.to_json() for g in self.generators],
        }
        if self.rule is not None:
            params = dict(self.rule.get("params", {}))
            if "extra" in params:
                params["extra"] = [e.to_json() for e in params["extra"]]
            if "slope" in params:
                params["slope"] = str(params["slope"])
            d["rule"] = {"type": self.rule["type"], "params": params}
        return d

    @classmethod
    def from_json(cls, d: dict, over: Optional["SubspaceUT"] = None) -> "SubspaceUT":
        w = Window.from_json(d["window"])
        gens = [_with_default_window(g, w) for g in d.get("generators", [])]
        rule = None
        if d.get("rule"):
            params = dict(d["rule"].get("params", {}))
            params["extra"] = [_with_default_window(e, w) for e in params.get("extra", [])]
            if "slope" in params:
                params["slope"] = Fraction(str(params["slope"]))
            rule = {"type": d["rule"]["type"], "params": params}
        return cls(d["kind"], gens, w, rule=rule, over=over)


def _with_default_window(g: dict, w: Window) -> UTLaurent:
    if "window" not in g:
        g = dict(g, window=w.to_json())
    return UTLaurent.from_json(g)


def triangle_rule(slope=1, step=1, start=1, extra=()) -> dict:
    return {"type": "triangle", "params": {"slope": Fraction(slope), "step": step, "start": start, "extra": list(extra)}}


def _vec(f: UTLaurent) -> Dict[Tuple[int, int], Fraction]:
    return {(l, m): c for (m, l), c in f.terms.items()}


def _clip(v, w: Window):
    return {(l, m): c for (l, m), c in v.items() if w.contains(m, l)}


@dataclass
class LevelBasis:
    """Valuation-adapted basis of S_L = S ∩ t^-L k[[u]][[t]] on a common window."""

    depth: int
    window: Window
    vectors: List[Dict[Tuple[int, int], Fraction]]
    pivots: List[Tuple[int, int]]  # (l, m)

    def dim_at(self, depth: int) -> int:
        return sum(1 for (l, _) in self.pivots if l >= -depth)

    def elements(self, depth_lo: Optional[int], depth_hi: int) -> List[UTLaurent]:
        """Basis elements whose valuation level lies in [-depth_hi, -depth_lo] (no upper bound for None)."""
        out = []
        for v, (l, _) in zip(self.vectors, self.pivots):
            if -depth_hi <= l and (depth_lo is None or l <= -depth_lo):
                out.append(UTLaurent({(m, ll): c for (ll, m), c in v.items()}, self.window))
        return out

    def all_elements(self) -> List[UTLaurent]:
        return [UTLaurent({(m, l): c for (l, m), c in v.items()}, self.window) for v in self.vectors]


def _check_depth(w: Window, depth: int):
    if -depth <= w.tmin:
        raise WindowTooSmall(f"level t^{-depth} is not above the window floor t^{w.tmin}")


def _algebra_monomials(A: SubspaceUT, max_weight: int) -> List[UTLaurent]:
    """Generator monomials of t-weight <= max_weight (1 included)."""
    ws = [-ut_valuation(g)[1] for g in A.generators]
    one = UTLaurent({(0, 0): 1}, A.window)
    cache = MonomialCache(A.generators, one, ut_mul, A.budget)
    out = []
    for total in range(0, max_weight + 1):
        if not ws:
            if total == 0:
                out.append(one)
            continue
        for e in weighted_exponents(ws, total):
            out.append(cache.get(e))
    return out


def spanning_elements(S: SubspaceUT, depth: int) -> List[UTLaurent]:
    """A spanning set of S ∩ t^-depth k[[u]][[t]] (up to the declared extra degree)."""
    _check_depth(S.window, depth)
    if S.kind == "algebra":
        return _algebra_monomials(S, depth + S.extra_degree)
    out: List[UTLaurent] = []
    if S.rule is not None:
        p = S.rule["params"]
        slope = Fraction(p.get("slope", 1))
        step = int(p.get("step", 1))
        start = int(p.get("start", 1))
        out.extend(p.get("extra", []))
        for i in range(start, depth + 1, step):
            jmax = math.floor(slope * i)
            if jmax > S.window.umax:
                raise WindowTooSmall(f"u^{jmax} t^{-i} exceeds umax {S.window.umax}")
            for j in range(jmax + 1):
                out.append(UTLaurent({(j, -i): 1}, S.window, clip=False))
    if S.over is not None:
        for g in S.generators:
            lg = ut_valuation(g)[1]
            room = depth + lg + S.extra_degree
            if room < 0:
                continue
            for mono in _algebra_monomials(S.over, room):
                out.append(ut_mul(mono, g))
    else:
        out.extend(S.generators)
    return out


def _common_window(elements: Sequence[UTLaurent], base: Window) -> Window:
    # floors are sentinels below certified valuations, so the lowest one is kept
    tmin, tmax, umax = base.tmin, base.tmax, base.umax
    for e in elements:
        tmin = min(tmin, e.window.tmin)
        tmax = min(tmax, e.window.tmax)
        umax = min(umax, e.window.umax)
    if tmax < tmin:
        raise WindowTooSmall("the common window of the spanning elements is empty")
    return Window(tmin, tmax, umax)


def level_basis(S: SubspaceUT, depth: int) -> LevelBasis:
    elems = spanning_elements(S, depth)
    if len(elems) > S.budget:
        raise BudgetExceeded(f"{len(elems)} spanning elements exceed budget {S.budget}")
    w = _common_window(elems, S.window)
    _check_depth(w, depth)
    e = Echelon(_lvl_key)
    for f in elems:
        e.add(_clip(_vec(f), w))
    vecs = reduced_basis(e)
    piv = e.pivot_keys()
    for (l, _) in piv:
        if l <= w.tmin:
            raise WindowTooSmall(f"pivot on the window floor t^{l}")
    # keep only the part inside the filtration step
    keep = [(v, p) for v, p in zip(vecs, piv) if p[0] >= -depth]
    return LevelBasis(depth, w, [v for v, _ in keep], [p for _, p in keep])


def filtration_dims(S: SubspaceUT, r: int, n_max: int) -> List[int]:
    """[dim S_0, ..., dim S_{n_max}] with S_n = S ∩ t^(-n r) k[[u]][[t]]."""
    lb = level_basis(S, n_max * r)
    return [lb.dim_at(n * r) for n in range(n_max + 1)]


def graded_increments(S: SubspaceUT, r: int, n_max: int) -> List[int]:
    dims = filtration_dims(S, r, n_max)
    return [b - a for a, b in zip(dims, dims[1:])]


def _in_span(basis_vectors, v, w: Window) -> bool:
    e = Echelon(_lvl_key)
    for b in basis_vectors:
        e.add(_clip(b, w))
    return e.contains(_clip(v, w))


def check_stability(A: SubspaceUT, W: SubspaceUT, n_max: int = 10, r: int = 1) -> bool:
    """A·W ⊆ W, checked generator by generator against W_{n_max} on the common window.

    Generators suffice: a monomial times w is a chain of generator products.
    """
    depth = n_max * r
    lb = level_basis(W, depth)
    elems = lb.all_elements()
    for g in A.generators:
        wg = -ut_valuation(g)[1]
        for b in elems:
            lvl = ut_valuation(b)[1]
            if lvl - wg < -depth:
                continue
            prod = ut_mul(g, b)
            win = _common_window([prod], lb.window)
            _check_depth(win, depth)
            if not _in_span(lb.vectors, _vec(prod), win):
                return False
    return True


def detect_rank(W: SubspaceUT, d: int = 1, n_max: int = 6, r_max: int = 4) -> int:
    """Least r with dim W_{nd} = (ndr+1)(ndr+2)/2 for 1 <= n <= n_max."""
    for r in range(1, r_max + 1):
        lb = level_basis(W, n_max * d * r)
        ok = True
        for n in range(1, n_max + 1):
            k = n * d * r
            if lb.dim_at(k) != (k + 1) * (k + 2) // 2:
                ok = False
                break
        if ok:
            return r
    raise NoRankFits(f"no rank r <= {r_max} fits the dimension condition up to n = {n_max}")


@dataclass
class WitnessReport:
    levels: Dict[int, List[UTLaurent]]
    window: Window

    def finitely_generated_through(self) -> Optional[int]:
        """Last level that needed a new generator, or None if none did."""
        lv = [n for n, w in self.levels.items() if w]
        return max(lv) if lv else None


def fg_witness(A: SubspaceUT, W: SubspaceUT, n_max: int, r: int = 1) -> WitnessReport:
    """For each level n, the W_n basis elements not in span(A·W_{n-1}) (greedy, in valuation order)."""
    depth = n_max * r
    lb = level_basis(W, depth)
    window = lb.window
    mono_cache: Dict[int, List[UTLaurent]] = {}

    def monos(k):
        if k not in mono_cache:
            mono_cache[k] = _algebra_monomials(A, k)
        return mono_cache[k]

    levels: Dict[int, List[UTLaurent]] = {}
    for n in range(1, n_max + 1):
        prev = lb.elements(None, (n - 1) * r)
        span_elems = []
        for b in prev:
            lvl = ut_valuation(b)[1]
            for m in monos(n * r + lvl):
                if ut_valuation(m)[1] + lvl < -n * r:
                    continue
                span_elems.append(ut_mul(m, b))
        win = _common_window(span_elems, window)
        _check_depth(win, n * r)
        e = Echelon(_lvl_key)
        for s in span_elems:
            e.add(_clip(_vec(s), win))
        found = []
        for b in lb.elements((n - 1) * r + 1, n * r):
            v = _clip(_vec(b), win)
            if not e.contains(v):
                found.append(b)
                e.add(v)
        levels[n] = found
    return WitnessReport(levels, window)


def algebra_generator_degrees(A: SubspaceUT, r: int = 1) -> List[Tuple[UTLaurent, Fraction]]:
    """Minimal generators among A's generators, tagged by filtration degree -nu_t / r, in input order."""
    ws = [-ut_valuation(g)[1] for g in A.generators]
    one = UTLaurent({(0, 0): 1}, A.window)
    keep = minimal_generators(A.generators, ws, one, ut_mul, lambda f: _clip(_vec(f), f.window))
    return [(A.generators[i], Fraction(ws[i], r)) for i in keep]


def algebra_veronese_degree(A: SubspaceUT, n_max: int, r: int = 1, d_max: int = 6) -> Optional[int]:
    """Veronese criterion on gr(A): pieces are the initial u-forms at each level."""
    from .algebra import Poly
    from .spectral import veronese_degree

    lb = level_basis(A, n_max * r)
    pieces: Dict[int, List[Poly]] = {j: [] for j in range(n_max + 1)}
    for v, (l, _) in zip(lb.vectors, lb.pivots):
        if (-l) % r:
            continue
        j = -l // r
        init = {(m,): c for (ll, m), c in v.items() if ll == l}
        pieces[j].append(Poly(1, init))
    if not pieces[0]:
        pieces[0] = [Poly.one(1)]
    return veronese_degree(pieces, n_max, d_max)


@dataclass
class PairReport:
    r: int
    d: int
    dims_a: List[int]
    dims_w: List[int]
    stable: bool
    witnesses: WitnessReport
    leading_a: Optional[Fraction]
    self_intersection: Optional[Fraction]
    generator_degrees: List[Fraction]
    window: Window = field(default=None)

    def to_json(self) -> dict:
        from .algebra import scalar_to_json

        sj = lambda c: None if c is None else scalar_to_json(c)
        return {
            "r": self.r,
            "d": self.d,
            "dims_a": self.dims_a,
            "dims_w": self.dims_w,
            "stable": self.stable,
            "witnesses": {str(n): [f.format() for f in ws] for n, ws in sorted(self.witnesses.levels.items())},
            "generation_needed_through": self.witnesses.finitely_generated_through(),
            "leading_a": sj(self.leading_a),
            "self_intersection": sj(self.self_intersection),
            "generator_degrees": [str(c) for c in self.generator_degrees],
            "window": None if self.window is None else self.window.to_json(),
        }


def analyze_pair(
    A: SubspaceUT,
    W: SubspaceUT,
    d: int = 1,
    n_max: int = 10,
    r_max: int = 4,
    a_levels: int = 40,
    n: int = 2,
) -> PairReport:
    """Rank, stability, finite-generation witnesses and the leading coefficient of A's filtration.

    The leading coefficient is fitted on the upper half of ``a_levels``; when
    the dims do not stabilize there it is reported as None.
    """
    from .errors import NotStabilized
    from .spectral import hilbert_leading

    r = detect_rank(W, d, min(n_max, 6), r_max)
    dims_w = filtration_dims(W, r, n_max)
    dims_a = filtration_dims(A, r, a_levels)
    stable = check_stability(A, W, n_max, r)
    wit = fg_witness(A, W, n_max, r)
    try:
        c = hilbert_leading(dims_a, (a_levels // 4, a_levels), n=n)
        ci = math.factorial(n) * c
    except NotStabilized:
        c = ci = None
    degs = [w for _, w in algebra_generator_degrees(A, r)]
    return PairReport(r, d, dims_a, dims_w, stable, wit, c, ci, degs, wit.window)
