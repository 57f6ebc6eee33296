"""Differential operators with power-series coefficients.

A ``DiffOp`` is a finite sum  sum_alpha c_alpha(x) d^alpha  where every
coefficient is known modulo M^precision (M the maximal ideal of k[[x]]).
Truncations of completed operators, whose d1-degree is unbounded in principle,
carry ``dhat=True``; they are stored as the finitely many terms whose
coefficient has order < precision.

Product precision charges each left term for the derivatives it can apply:

    N(P*Q) = min(N_P, min_alpha (N_Q - |alpha| + ord_M c_alpha))

A left term c d^alpha differentiates the right coefficients at most |alpha|
times, and its coefficient multiplies the result, so digits lost to
differentiation are recovered by ord_M c_alpha.  Exact operands
(precision INF) lose nothing.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product as cartesian
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .algebra import INF, Exp, Poly, TruncatedSeries, _prec_from_json, _prec_to_json, as_scalar
from .errors import PrecisionExhausted, PrecisionZero, ZeroOperator


def _multi_binom(alpha: Exp, gamma: Exp) -> int:
    out = 1
    for a, g in zip(alpha, gamma):
        out *= math.comb(a, g)
    return out


def _sub_indices(alpha: Exp):
    return cartesian(*(range(a + 1) for a in alpha))


def _series_min_degree(p: Poly, precision):
    d = p.min_degree()
    return precision if d is None else d


class DiffOp:
    __slots__ = ("nvars", "terms", "precision", "dhat")

    def __init__(self, nvars: int, terms: Optional[Mapping[Exp, Poly]] = None, precision=INF, dhat: bool = False):
        if precision != INF:
            precision = int(precision)
            if precision < 0:
                raise ValueError("precision must be >= 0")
        self.nvars = nvars
        self.precision = precision
        self.dhat = bool(dhat)
        clean: Dict[Exp, Poly] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != nvars or any(a < 0 for a in alpha):
                raise ValueError(f"bad derivative index {alpha}")
            if not isinstance(c, Poly):
                c = Poly.const(nvars, c)
            elif c.nvars != nvars:
                raise ValueError("coefficient has wrong variable count")
            c = c.truncate(precision)
            if alpha in clean:
                c = clean[alpha] + c
            if c.is_zero():
                clean.pop(alpha, None)
            else:
                clean[alpha] = c
        self.terms = clean

    # constructors ------------------------------------------------------------
    @classmethod
    def scalar(cls, nvars: int, c=1) -> "DiffOp":
        return cls(nvars, {(0,) * nvars: Poly.const(nvars, c)})

    @classmethod
    def d(cls, nvars: int, i: int, k: int = 1) -> "DiffOp":
        alpha = [0] * nvars
        alpha[i] = k
        return cls(nvars, {tuple(alpha): Poly.one(nvars)})

    @classmethod
    def x(cls, nvars: int, i: int) -> "DiffOp":
        return cls(nvars, {(0,) * nvars: Poly.var(nvars, i)})

    @classmethod
    def mult(cls, f) -> "DiffOp":
        """Multiplication operator by a polynomial or truncated series."""
        if isinstance(f, Poly):
            return cls(f.nvars, {(0,) * f.nvars: f})
        return cls(f.nvars, {(0,) * f.nvars: f.body}, f.precision)

    @classmethod
    def from_symbol_poly(cls, p: Poly) -> "DiffOp":
        """Constant-coefficient operator obtained by xi_i -> d_i."""
        n = p.nvars
        return cls(n, {e: Poly.const(n, c) for e, c in p.terms.items()})

    # queries -----------------------------------------------------------------
    def coefficient(self, alpha: Exp) -> TruncatedSeries:
        return TruncatedSeries(self.terms.get(tuple(alpha), Poly.zero(self.nvars)), self.precision)

    def items(self):
        """Terms in graded lex order of the derivative index."""
        for a in sorted(self.terms, key=lambda e: (sum(e), e)):
            yield a, self.terms[a]

    def is_zero(self) -> bool:
        """Zero at stored precision."""
        return not self.terms

    def with_precision(self, n) -> "DiffOp":
        if n > self.precision:
            raise ValueError("cannot raise precision")
        return DiffOp(self.nvars, self.terms, n, self.dhat)

    def agrees_with(self, other: "DiffOp", below=None) -> bool:
        n = min(self.precision, other.precision)
        if below is not None:
            n = min(n, below)
        keys = set(self.terms) | set(other.terms)
        z = Poly.zero(self.nvars)
        return all(
            self.terms.get(a, z).truncate(n) == other.terms.get(a, z).truncate(n) for a in keys
        )

    def left_charge(self) -> float:
        """Largest number of digits this operator can cost a right factor."""
        return max(
            (sum(a) - _series_min_degree(c, self.precision) for a, c in self.terms.items()),
            default=0,
        )

    # arithmetic --------------------------------------------------------------
    def _check(self, other: "DiffOp"):
        if not isinstance(other, DiffOp) or other.nvars != self.nvars:
            raise ValueError("operators must share the variable count")

    def __add__(self, other) -> "DiffOp":
        if not isinstance(other, DiffOp):
            other = DiffOp.scalar(self.nvars, as_scalar(other))
        self._check(other)
        n = min(self.precision, other.precision)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return DiffOp(self.nvars, out, n, self.dhat or other.dhat)

    __radd__ = __add__

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.nvars, {a: -c for a, c in self.terms.items()}, self.precision, self.dhat)

    def __sub__(self, other) -> "DiffOp":
        if not isinstance(other, DiffOp):
            other = DiffOp.scalar(self.nvars, as_scalar(other))
        return self + (-other)

    def __rsub__(self, other) -> "DiffOp":
        return (-self) + other

    def scale(self, c) -> "DiffOp":
        c = as_scalar(c)
        return DiffOp(self.nvars, {a: p.scale(c) for a, p in self.terms.items()}, self.precision, self.dhat)

    def __mul__(self, other) -> "DiffOp":
        if isinstance(other, DiffOp):
            return op_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> "DiffOp":
        return self.scale(other)

    def __pow__(self, k: int) -> "DiffOp":
        if k < 0:
            raise ValueError("negative power of an operator")
        out = DiffOp.scalar(self.nvars, 1)
        for _ in range(k):
            out = op_mul(out, self)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.precision == other.precision
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, self.precision, frozenset(self.terms.items())))

    # formatting --------------------------------------------------------------
    def format(self) -> str:
        if not self.terms:
            s = "0"
        else:
            parts = []
            for a, c in self.items():
                d = "*".join(
                    f"d{i + 1}" if k == 1 else f"d{i + 1}^{k}" for i, k in enumerate(a) if k
                )
                cs = c.format()
                if not d:
                    parts.append(cs)
                elif c == 1:
                    parts.append(d)
                elif c == -1:
                    parts.append("-" + d)
                elif len(c.terms) == 1:
                    parts.append(f"{cs}*{d}")
                else:
                    parts.append(f"({cs})*{d}")
            s = parts[0]
            for p in parts[1:]:
                s += " - " + p[1:] if p.startswith("-") else " + " + p
        if self.precision != INF:
            s += f"  [mod M^{self.precision}]"
        return s

    def __repr__(self) -> str:
        return f"DiffOp({self.format()!r})"

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "precision": _prec_to_json(self.precision),
            "dhat": self.dhat,
            "terms": [
                {"dop": list(a), "coef": TruncatedSeries(c, self.precision).to_json()}
                for a, c in self.items()
            ],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "DiffOp":
        n = int(d["nvars"])
        prec = _prec_from_json(d.get("precision"))
        terms: Dict[Exp, Poly] = {}
        for t in d.get("terms", []):
            a = tuple(int(k) for k in t["dop"])
            c = TruncatedSeries.from_json(t["coef"])
            prec = min(prec, c.precision)
            terms[a] = terms[a] + c.body if a in terms else c.body
        return cls(n, terms, prec, bool(d.get("dhat", False)))


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


def product_precision(P: DiffOp, Q: DiffOp):
    if Q.precision == INF:
        return P.precision
    n = P.precision
    for a, c in P.terms.items():
        n = min(n, Q.precision - sum(a) + _series_min_degree(c, P.precision))
    return n


def op_mul(P: DiffOp, Q: DiffOp) -> DiffOp:
    """Leibniz product: d^a * q = sum_g C(a,g) d^g(q) d^(a-g)."""
    P._check(Q)
    N = product_precision(P, Q)
    if N <= 0:
        raise PrecisionExhausted(f"product precision would be {N}")
    n = P.nvars
    out: Dict[Exp, Poly] = {}
    deriv_cache: Dict[Tuple[Exp, Exp], Poly] = {}
    for alpha, c in P.terms.items():
        for beta, dq in Q.terms.items():
            for gamma in _sub_indices(alpha):
                key = (beta, gamma)
                dg = deriv_cache.get(key)
                if dg is None:
                    dg = dq.diff_multi(gamma)
                    deriv_cache[key] = dg
                if dg.is_zero():
                    continue
                coef = c.mul(dg, below=N)
                if coef.is_zero():
                    continue
                b = _multi_binom(alpha, gamma)
                if b != 1:
                    coef = coef.scale(b)
                delta = tuple(alpha[i] - gamma[i] + beta[i] for i in range(n))
                out[delta] = out[delta] + coef if delta in out else coef
    return DiffOp(n, out, N, P.dhat or Q.dhat)


def op_commutator(P: DiffOp, Q: DiffOp) -> DiffOp:
    C = op_mul(P, Q) - op_mul(Q, P)
    if not P.dhat and not Q.dhat and not C.is_zero() and not P.is_zero() and not Q.is_zero():
        assert order_of(C) <= order_of(P) + order_of(Q) - 1
    return C


def order_of(P: DiffOp, stable: bool = False, horizon: int = 1) -> int:
    """Order of P.

    The raw order is the largest |alpha| present.  For a truncated completed
    operator that number grows with the truncation, so ``stable=True`` only
    counts terms whose coefficient has ord_M < ``horizon``; these do not move
    when precision is raised.  For ordinary operators both agree.
    """
    if P.is_zero():
        if P.precision == INF:
            raise ZeroOperator("order of the zero operator")
        raise PrecisionZero(f"operator vanishes modulo M^{P.precision}")
    if stable and P.dhat:
        orders = [sum(a) for a, c in P.terms.items() if c.min_degree() < horizon]
        if not orders:
            raise PrecisionZero(f"no term with coefficient order < {horizon}")
        return max(orders)
    return max(sum(a) for a in P.terms)


def apply(P: DiffOp, f) -> TruncatedSeries:
    """Action of P on a power series: sum c_alpha d^alpha(f)."""
    if isinstance(f, Poly):
        f = TruncatedSeries(f)
    if f.nvars != P.nvars:
        raise ValueError("variable count mismatch")
    N = P.precision
    if f.precision != INF:
        for a, c in P.terms.items():
            N = min(N, f.precision - sum(a) + _series_min_degree(c, P.precision))
    if N <= 0:
        raise PrecisionExhausted(f"result precision would be {N}")
    total = Poly.zero(P.nvars)
    for a, c in P.terms.items():
        df = f.body.diff_multi(a)
        if not df.is_zero():
            total = total + c.mul(df, below=N)
    return TruncatedSeries(total, N)


def normal_ordered_exp(N: int, nvars: int = 2, var: int = 0) -> DiffOp:
    """sum_{k<N} (-1)^k x^k d^k / k!  for x = x_{var+1}; acts as evaluation at x = 0."""
    if N < 1:
        raise ValueError("precision must be >= 1")
    terms = {}
    for k in range(N):
        e = [0] * nvars
        e[var] = k
        terms[tuple(e)] = Poly.monomial(e, Fraction((-1) ** k, math.factorial(k)))
    return DiffOp(nvars, terms, N, dhat=True)


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------


class SymbolPoly:
    """Element of k[[x]][xi]: map xi-exponent -> TruncatedSeries coefficient.

    ``degree`` is set when the value is a principal symbol of that order.
    """

    __slots__ = ("nvars", "coeffs", "degree", "_precision")

    def __init__(self, nvars: int, coeffs: Mapping[Exp, TruncatedSeries], degree: Optional[int] = None, precision=INF):
        self.nvars = nvars
        self.degree = degree
        # absent coefficients are zero modulo this precision
        self._precision = min([precision] + [c.precision for c in coeffs.values()])
        self.coeffs = {tuple(a): c for a, c in coeffs.items() if not c.is_zero()}

    @classmethod
    def from_poly(cls, p: Poly, degree: Optional[int] = None) -> "SymbolPoly":
        """Constant symbol from a polynomial in xi."""
        n = p.nvars
        return cls(n, {e: TruncatedSeries.const(n, c) for e, c in p.terms.items()}, degree)

    @property
    def precision(self):
        return self._precision

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(c.body.is_constant() for c in self.coeffs.values())

    def homogeneous(self) -> bool:
        return len({sum(a) for a in self.coeffs}) <= 1

    def agrees_with(self, other: "SymbolPoly", below=None) -> bool:
        z1 = TruncatedSeries(Poly.zero(self.nvars), self.precision)
        z2 = TruncatedSeries(Poly.zero(self.nvars), other.precision)
        for a in set(self.coeffs) | set(other.coeffs):
            if not self.coeffs.get(a, z1).agrees_with(other.coeffs.get(a, z2), below):
                return False
        return True

    def diff_xi(self, v: int) -> "SymbolPoly":
        out = {}
        for a, c in self.coeffs.items():
            if a[v]:
                b = list(a)
                b[v] -= 1
                out[tuple(b)] = c * a[v]
        return SymbolPoly(self.nvars, out, precision=self.precision)

    def diff_x(self, v: int) -> "SymbolPoly":
        prec = self.precision - 1 if self.precision != INF else INF
        return SymbolPoly(self.nvars, {a: c.diff(v) for a, c in self.coeffs.items()}, precision=prec)

    def __add__(self, other: "SymbolPoly") -> "SymbolPoly":
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out[a] + c if a in out else c
        return SymbolPoly(self.nvars, out, precision=min(self.precision, other.precision))

    def __neg__(self) -> "SymbolPoly":
        return SymbolPoly(self.nvars, {a: -c for a, c in self.coeffs.items()}, self.degree, self.precision)

    def __sub__(self, other: "SymbolPoly") -> "SymbolPoly":
        return self + (-other)

    def __mul__(self, other: "SymbolPoly") -> "SymbolPoly":
        out: Dict[Exp, TruncatedSeries] = {}
        for a, c in self.coeffs.items():
            for b, d in other.coeffs.items():
                e = tuple(i + j for i, j in zip(a, b))
                out[e] = out[e] + c * d if e in out else c * d
        deg = None
        if self.degree is not None and other.degree is not None:
            deg = self.degree + other.degree
        zs = TruncatedSeries(Poly.zero(self.nvars), self.precision)
        zo = TruncatedSeries(Poly.zero(self.nvars), other.precision)
        # a zero factor still bounds the product precision
        prec = min(
            [(zs * c).precision for c in other.coeffs.values()]
            + [(zo * c).precision for c in self.coeffs.values()]
            + [self.precision + other.precision]
        )
        return SymbolPoly(self.nvars, out, deg, prec)

    def format(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for a in sorted(self.coeffs, key=lambda e: (sum(e), e)):
            c = self.coeffs[a]
            xi = "*".join(
                f"xi{i + 1}" if k == 1 else f"xi{i + 1}^{k}" for i, k in enumerate(a) if k
            )
            cs = c.body.format()
            if not xi:
                parts.append(cs)
            elif c.body == 1:
                parts.append(xi)
            elif len(c.body.terms) == 1:
                parts.append(f"{cs}*{xi}")
            else:
                parts.append(f"({cs})*{xi}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"SymbolPoly({self.format()!r}, degree={self.degree})"

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "terms": [
                {"xi": list(a), "coef": self.coeffs[a].to_json()}
                for a in sorted(self.coeffs, key=lambda e: (sum(e), e))
            ],
        }


def principal_symbol(P: DiffOp, degree: Optional[int] = None, stable: bool = False) -> SymbolPoly:
    """Homogeneous top-order part of P with series coefficients.

    ``degree`` forces the filtration degree (useful for sigma_{i+j-1} of a
    commutator, which may vanish); otherwise the order of P is used.
    """
    if degree is None:
        degree = order_of(P, stable=stable)
    coeffs = {
        a: TruncatedSeries(c, P.precision) for a, c in P.terms.items() if sum(a) == degree
    }
    return SymbolPoly(P.nvars, coeffs, degree, P.precision)


def symbol_image(s: SymbolPoly) -> Poly:
    """Set x = 0: the image of a symbol in k[xi]."""
    out = {}
    for a, c in s.coeffs.items():
        if c.precision < 1:
            raise PrecisionExhausted("constant terms of the coefficients are unknown")
        v = c.body.constant_term()
        if v:
            out[a] = v
    return Poly(s.nvars, out)


def constant_symbol(P: DiffOp) -> Poly:
    """sigma(P) as a polynomial in xi, raising if it depends on x."""
    from .errors import NonConstantSymbol

    s = principal_symbol(P)
    if not s.is_constant():
        raise NonConstantSymbol(f"principal symbol {s.format()} depends on x")
    return symbol_image(s)


def poisson_bracket(s: SymbolPoly, r: SymbolPoly) -> SymbolPoly:
    """{s, r} = sum_v ds/dxi_v * d_v r - dr/dxi_v * d_v s."""
    if s.nvars != r.nvars:
        raise ValueError("variable count mismatch")
    out = SymbolPoly(s.nvars, {}, precision=min(s.precision, r.precision))
    for v in range(s.nvars):
        out = out + s.diff_xi(v) * r.diff_x(v) - r.diff_xi(v) * s.diff_x(v)
    if s.degree is not None and r.degree is not None:
        out.degree = s.degree + r.degree - 1
    return out
