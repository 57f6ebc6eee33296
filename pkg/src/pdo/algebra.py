"""Exact scalar, polynomial, truncated power series and windowed Laurent arithmetic.

Scalars are ``fractions.Fraction``.  Every value is immutable after
construction; term maps are plain dicts that are never mutated once built.

Iteration order of terms is graded lexicographic (total degree first, then
exponent tuple) so that serialized output is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

from .errors import (
    CoordinateMismatch,
    EmptyResultWindow,
    PrecisionZero,
    WindowOverflow,
    WindowTooSmall,
    ZeroConstantTerm,
    ZeroInput,
)

Scalar = Fraction
Exp = Tuple[int, ...]
INF = math.inf

Number = Union[int, Fraction]


def as_scalar(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact scalar: {c!r}")


def grlex_key(e: Exp):
    return (sum(e), e)


def scalar_to_json(c: Fraction) -> dict:
    return {"num": str(c.numerator), "den": str(c.denominator)}


def scalar_from_json(d: Mapping) -> Fraction:
    den = int(d.get("den", "1"))
    if den <= 0:
        raise ValueError("denominator must be positive")
    return Fraction(int(d["num"]), den)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Sparse polynomial over Q in ``nvars`` variables.

    ``terms`` maps exponent tuples to nonzero Fractions.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Mapping[Exp, Number]] = None):
        self.nvars = nvars
        clean: Dict[Exp, Fraction] = {}
        if terms:
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} has wrong length for {nvars} variables")
                if any(k < 0 for k in e):
                    raise ValueError(f"negative exponent {e}")
                c = as_scalar(c)
                if c:
                    clean[e] = clean.get(e, Fraction(0)) + c
                    if not clean[e]:
                        del clean[e]
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Exp, Fraction]) -> "Poly":
        # caller guarantees: no zeros, correct lengths
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, c: Number) -> "Poly":
        c = as_scalar(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def one(cls, nvars: int) -> "Poly":
        return cls.const(nvars, 1)

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls._raw(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Iterable[int], c: Number = 1) -> "Poly":
        exp = tuple(exp)
        return cls(len(exp), {exp: c})

    # basic queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def items(self) -> Iterator[Tuple[Exp, Fraction]]:
        """Terms in graded lexicographic order."""
        for e in sorted(self.terms, key=grlex_key):
            yield e, self.terms[e]

    def coeff(self, e: Exp) -> Fraction:
        return self.terms.get(tuple(e), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def min_degree(self) -> Optional[int]:
        return min((sum(e) for e in self.terms), default=None)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def truncate(self, n) -> "Poly":
        """Drop every term of total degree >= n."""
        if n == INF:
            return self
        return Poly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) < n})

    # arithmetic ----------------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def scale(self, c: Number) -> "Poly":
        c = as_scalar(c)
        if not c:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {e: c * v for e, v in self.terms.items()})

    def mul(self, other: "Poly", below=INF) -> "Poly":
        """Product, discarding terms of total degree >= ``below``."""
        out: Dict[Exp, Fraction] = {}
        n = self.nvars
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            if d1 >= below:
                continue
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) >= below:
                    continue
                e = tuple(e1[i] + e2[i] for i in range(n))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(n, out)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def diff(self, i: int, k: int = 1) -> "Poly":
        """k-th partial derivative in variable i."""
        out = {}
        for e, c in self.terms.items():
            if e[i] >= k:
                f = 1
                for j in range(k):
                    f *= e[i] - j
                ne = list(e)
                ne[i] -= k
                out[tuple(ne)] = c * f
        return Poly._raw(self.nvars, out)

    def diff_multi(self, alpha: Exp) -> "Poly":
        p = self
        for i, k in enumerate(alpha):
            if k:
                p = p.diff(i, k)
        return p

    def evaluate(self, point) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= Fraction(x) ** k
            total += v
        return total

    def subs_zero(self, indices=None) -> "Poly":
        """Set the given variables (default: all) to zero."""
        idx = range(self.nvars) if indices is None else indices
        return Poly._raw(
            self.nvars, {e: c for e, c in self.terms.items() if all(e[i] == 0 for i in idx)}
        )

    def leading(self) -> Tuple[Exp, Fraction]:
        """Leading term under graded lex (largest)."""
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def divmod(self, divisor: "Poly") -> Tuple["Poly", "Poly"]:
        """Division by a single polynomial under graded lex.

        The remainder is zero exactly when ``divisor`` divides ``self``.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        le, lc = divisor.leading()
        n = self.nvars
        q: Dict[Exp, Fraction] = {}
        r: Dict[Exp, Fraction] = {}
        p = dict(self.terms)
        while p:
            e = max(p, key=grlex_key)
            c = p[e]
            if all(e[i] >= le[i] for i in range(n)):
                qe = tuple(e[i] - le[i] for i in range(n))
                qc = c / lc
                q[qe] = q.get(qe, 0) + qc
                for de, dc in divisor.terms.items():
                    te = tuple(qe[i] + de[i] for i in range(n))
                    v = p.get(te, 0) - qc * dc
                    if v:
                        p[te] = v
                    else:
                        p.pop(te, None)
            else:
                r[e] = c
                del p[e]
        return Poly(n, q), Poly._raw(n, r)

    def exact_div(self, divisor: "Poly") -> Optional["Poly"]:
        q, r = self.divmod(divisor)
        return q if r.is_zero() else None

    # comparison ----------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # formatting ----------------------------------------------------------------
    def format(self, names=None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                s = str(c)
            elif c == 1:
                s = mono
            elif c == -1:
                s = "-" + mono
            else:
                s = f"{c}*{mono}" if c.denominator == 1 else f"({c})*{mono}"
            parts.append(s)
        out = parts[0]
        for s in parts[1:]:
            out += " - " + s[1:] if s.startswith("-") else " + " + s
        return out

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {self.format()!r})"

    # serialization -------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [{"exp": list(e), **scalar_to_json(c)} for e, c in self.items()],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "Poly":
        n = int(d["nvars"])
        terms: Dict[Exp, Fraction] = {}
        for t in d.get("terms", []):
            e = tuple(int(k) for k in t["exp"])
            terms[e] = terms.get(e, Fraction(0)) + scalar_from_json(t)
        return cls(n, terms)


# ---------------------------------------------------------------------------
# Truncated power series
# ---------------------------------------------------------------------------


def _prec_to_json(n):
    return None if n == INF else int(n)


def _prec_from_json(v):
    return INF if v is None else int(v)


class TruncatedSeries:
    """Element of k[[x1..xn]] known modulo M^precision, M = (x1..xn).

    ``precision == INF`` marks an exact (polynomial) value.
    """

    __slots__ = ("body", "precision")

    def __init__(self, body: Poly, precision=INF):
        if precision != INF:
            precision = int(precision)
            if precision < 0:
                raise ValueError("precision must be >= 0")
        self.body = body.truncate(precision)
        self.precision = precision

    @property
    def nvars(self) -> int:
        return self.body.nvars

    @classmethod
    def from_poly(cls, p: Poly, precision=INF) -> "TruncatedSeries":
        return cls(p, precision)

    @classmethod
    def const(cls, nvars: int, c: Number, precision=INF) -> "TruncatedSeries":
        return cls(Poly.const(nvars, c), precision)

    def is_zero(self) -> bool:
        """Zero at stored precision."""
        return self.body.is_zero()

    def ord_m(self) -> int:
        """Order along the maximal ideal: min{k : f in M^k}."""
        d = self.body.min_degree()
        if d is None:
            if self.precision == INF:
                raise ZeroInput("ord of the zero series")
            raise PrecisionZero(f"series vanishes modulo M^{self.precision}")
        return d

    def _ord_or_prec(self):
        d = self.body.min_degree()
        return self.precision if d is None else d

    def __add__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        n = min(self.precision, other.precision)
        return TruncatedSeries((self.body + other.body), n)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(-self.body, self.precision)

    def __sub__(self, other) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TruncatedSeries":
        return self._coerce(other) - self

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, Poly):
            return TruncatedSeries(other)
        return TruncatedSeries.const(self.nvars, other)

    def __mul__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        # f*g - f0*g0 = eps*g + f0*eta + eps*eta lies in M^min(Nf+ord g, Ng+ord f)
        n = min(
            self.precision + other._ord_or_prec(),
            other.precision + self._ord_or_prec(),
        )
        return TruncatedSeries(self.body.mul(other.body, below=n), n)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return series_invert(self) ** (-k)
        result = TruncatedSeries.const(self.nvars, 1)
        for _ in range(k):
            result = result * self
        return result

    def diff(self, i: int, k: int = 1) -> "TruncatedSeries":
        return TruncatedSeries(self.body.diff(i, k), self.precision - k if self.precision != INF else INF)

    def with_precision(self, n) -> "TruncatedSeries":
        if n > self.precision:
            raise ValueError("cannot raise precision")
        return TruncatedSeries(self.body, n)

    def agrees_with(self, other: "TruncatedSeries", below=None) -> bool:
        n = min(self.precision, other.precision)
        if below is not None:
            n = min(n, below)
        return self.body.truncate(n) == other.body.truncate(n)

    def __eq__(self, other) -> bool:
        if isinstance(other, TruncatedSeries):
            return self.precision == other.precision and self.body == other.body
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.body, self.precision))

    def format(self, names=None) -> str:
        s = self.body.format(names)
        if self.precision == INF:
            return s
        return f"{s} + O(M^{self.precision})"

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.format()!r})"

    def to_json(self) -> dict:
        d = self.body.to_json()
        d["precision"] = _prec_to_json(self.precision)
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "TruncatedSeries":
        return cls(Poly.from_json(d), _prec_from_json(d.get("precision")))


def series_invert(f: TruncatedSeries) -> TruncatedSeries:
    """Multiplicative inverse modulo M^precision.

    Raises ZeroConstantTerm when f(0) = 0.  Precision is preserved.
    """
    c = f.body.constant_term()
    if not c:
        raise ZeroConstantTerm("series has zero constant term")
    n = f.precision
    if n == INF:
        if f.body.is_constant():
            return TruncatedSeries.const(f.nvars, 1 / c)
        raise ValueError("inverse of a nonconstant polynomial needs a finite precision")
    # 1/f = (1/c) * sum_k h^k with h = 1 - f/c in M
    h = (Poly.one(f.nvars) - f.body.scale(1 / c)).truncate(n)
    total = Poly.one(f.nvars)
    power = Poly.one(f.nvars)
    for _ in range(1, n):
        power = power.mul(h, below=n)
        if power.is_zero():
            break
        total = total + power
    return TruncatedSeries(total.scale(1 / c), n)


def series_exp(g: TruncatedSeries) -> TruncatedSeries:
    """exp(g) for g in M, modulo M^precision."""
    if g.body.constant_term():
        raise ValueError("exp needs a series without constant term")
    n = g.precision
    if n == INF:
        raise ValueError("exp needs a finite precision")
    total = Poly.one(g.nvars)
    power = Poly.one(g.nvars)
    fact = Fraction(1)
    for k in range(1, n):
        power = power.mul(g.body, below=n)
        if power.is_zero():
            break
        fact /= k
        total = total + power.scale(fact)
    return TruncatedSeries(total, n)


# ---------------------------------------------------------------------------
# k[[u]]((t)) with explicit windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Known region of a k[[u]]((t)) element.

    Coefficients of u^m t^l are exact for tmin <= l <= tmax and 0 <= m <= umax.
    Nothing is tracked below ``tmin``: a value whose lowest stored level sits on
    the floor may have been cut off from below.
    """

    tmin: int
    tmax: int
    umax: int

    def __post_init__(self):
        if self.tmax < self.tmin:
            raise ValueError("empty window: tmax < tmin")
        if self.umax < 0:
            raise ValueError("umax must be >= 0")

    def contains(self, m: int, l: int) -> bool:
        return 0 <= m <= self.umax and self.tmin <= l <= self.tmax

    def intersect(self, other: "Window") -> "Window":
        return Window(max(self.tmin, other.tmin), min(self.tmax, other.tmax), min(self.umax, other.umax))

    def to_json(self) -> dict:
        return {"tmin": self.tmin, "tmax": self.tmax, "umax": self.umax}

    @classmethod
    def from_json(cls, d: Mapping) -> "Window":
        return cls(int(d["tmin"]), int(d["tmax"]), int(d["umax"]))


class UTLaurent:
    """Windowed element of k[[u]]((t)).

    Keys of ``terms`` are (u-exponent m, t-exponent l).  With ``coords == "z"``
    the same type holds the image under the substitution t -> z2,
    u -> z1^-1 z2; keys are then (z1^-1 degree a, z2 exponent b) and the window
    still describes the source rectangle in (u, t), so the image region is the
    parallelogram tmin <= b - a <= tmax.
    """

    __slots__ = ("terms", "window", "coords")

    def __init__(self, terms: Mapping[Tuple[int, int], Number], window: Window, coords: str = "ut", clip: bool = True):
        if coords not in ("ut", "z"):
            raise ValueError(f"unknown coordinates {coords!r}")
        self.window = window
        self.coords = coords
        clean: Dict[Tuple[int, int], Fraction] = {}
        for (m, l), c in terms.items():
            c = as_scalar(c)
            if not c:
                continue
            if not self._inside(m, l):
                if clip:
                    continue
                raise WindowOverflow(f"term ({m},{l}) lies outside window {window}")
            v = clean.get((m, l), Fraction(0)) + c
            if v:
                clean[(m, l)] = v
            else:
                clean.pop((m, l), None)
        self.terms = clean

    def _inside(self, m: int, l: int) -> bool:
        if self.coords == "ut":
            return self.window.contains(m, l)
        return self.window.contains(m, l - m)

    @classmethod
    def monomial(cls, m: int, l: int, window: Window, c: Number = 1) -> "UTLaurent":
        return cls({(m, l): c}, window, clip=False)

    @classmethod
    def zero(cls, window: Window, coords: str = "ut") -> "UTLaurent":
        return cls({}, window, coords)

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        """Terms ordered by (t-exponent, u-exponent)."""
        for k in sorted(self.terms, key=lambda ml: (ml[1], ml[0])):
            yield k, self.terms[k]

    def levels(self):
        return sorted({l for (_, l) in self.terms})

    def with_window(self, window: Window) -> "UTLaurent":
        """Restrict to a window contained in the current one."""
        w = self.window.intersect(window)
        return UTLaurent(self.terms, w, self.coords)

    def _check_ut(self, other=None):
        if self.coords != "ut" or (other is not None and other.coords != "ut"):
            raise CoordinateMismatch("operation needs (u, t) coordinates")

    def __add__(self, other: "UTLaurent") -> "UTLaurent":
        if self.coords != other.coords:
            raise CoordinateMismatch("cannot add values in different coordinates")
        w = self.window.intersect(other.window)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return UTLaurent(out, w, self.coords)

    def __neg__(self) -> "UTLaurent":
        return UTLaurent({k: -c for k, c in self.terms.items()}, self.window, self.coords)

    def __sub__(self, other: "UTLaurent") -> "UTLaurent":
        return self + (-other)

    def scale(self, c: Number) -> "UTLaurent":
        c = as_scalar(c)
        return UTLaurent({k: c * v for k, v in self.terms.items()}, self.window, self.coords)

    def __mul__(self, other) -> "UTLaurent":
        if isinstance(other, UTLaurent):
            return ut_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, UTLaurent):
            return self.coords == other.coords and self.window == other.window and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.coords, self.window, frozenset(self.terms.items())))

    def same_terms(self, other: "UTLaurent") -> bool:
        return self.coords == other.coords and self.terms == other.terms

    def format(self) -> str:
        if not self.terms:
            return "0"
        a, b = ("u", "t") if self.coords == "ut" else ("z1^-1", "z2")
        parts = []
        for (m, l), c in self.items():
            mono = []
            if m:
                mono.append(a if m == 1 else f"{a}^{m}")
            if l:
                mono.append(b if l == 1 else f"{b}^{l}")
            s = "*".join(mono)
            if not s:
                parts.append(str(c))
            elif c == 1:
                parts.append(s)
            else:
                parts.append(f"{c}*{s}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"UTLaurent({self.format()!r}, {self.window})"

    def to_json(self) -> dict:
        d = {
            "terms": [{"u": m, "t": l, **scalar_to_json(c)} for (m, l), c in self.items()],
            "window": self.window.to_json(),
        }
        if self.coords != "ut":
            d["coords"] = self.coords
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "UTLaurent":
        w = Window.from_json(d["window"])
        terms: Dict[Tuple[int, int], Fraction] = {}
        for t in d.get("terms", []):
            k = (int(t["u"]), int(t["t"]))
            terms[k] = terms.get(k, Fraction(0)) + scalar_from_json(t)
        return cls(terms, w, d.get("coords", "ut"), clip=False)


def ut_valuation(f: UTLaurent) -> Tuple[int, int]:
    """Rank-two valuation (m, l): f = t^l u^m * (unit form)."""
    f._check_ut()
    if f.is_zero():
        raise ZeroInput("valuation of zero")
    l = min(l for (_, l) in f.terms)
    if l <= f.window.tmin:
        raise WindowTooSmall(f"lowest level t^{l} touches the window floor {f.window.tmin}")
    m = min(m for (m, ll) in f.terms if ll == l)
    return m, l


def _t_lower_bound(f: UTLaurent) -> int:
    if f.is_zero():
        return f.window.tmax + 1
    return ut_valuation(f)[1]


def ut_mul(f: UTLaurent, g: UTLaurent) -> UTLaurent:
    """Product in k[[u]]((t)) with a conservatively computed window."""
    f._check_ut(g)
    lf = _t_lower_bound(f)
    lg = _t_lower_bound(g)
    floor = lf + lg - 1
    top = min(f.window.tmax + lg, g.window.tmax + lf)
    umax = min(f.window.umax, g.window.umax)
    if top <= floor:
        raise EmptyResultWindow(f"product window [{floor}, {top}] is empty")
    if not f.is_zero() and not g.is_zero():
        mlead = ut_valuation(f)[0] + ut_valuation(g)[0]
        if mlead > umax:
            # the lowest level would look zero inside the window
            raise WindowOverflow(f"leading term u^{mlead} t^{lf + lg} exceeds umax {umax}")
    w = Window(floor, top, umax)
    out: Dict[Tuple[int, int], Fraction] = {}
    for (m1, l1), c1 in f.terms.items():
        for (m2, l2), c2 in g.terms.items():
            m, l = m1 + m2, l1 + l2
            if m > umax or l > top:
                continue
            out[(m, l)] = out.get((m, l), 0) + c1 * c2
    return UTLaurent(out, w)
