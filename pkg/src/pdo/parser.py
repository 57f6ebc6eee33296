"""Expression parser for operators.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" INT)?
    atom   := INT | "x" INT | "d" INT | "E" | "inv" "(" expr ")" | "(" expr ")"

``xi`` is multiplication by the i-th coordinate, ``di`` the i-th partial
derivative, ``E`` the normal-ordered exponential sum (-x1)^k d1^k / k!.
Division and ``inv`` accept only multiplication operators with nonzero
constant term.  Integers and polynomial atoms are exact; ``E`` and ``inv`` of a
nonconstant series are built at the requested precision.
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

from .algebra import INF, Poly, TruncatedSeries, series_invert
from .diffop import DiffOp, normal_ordered_exp
from .errors import ParseError, ZeroConstantTerm

_TOKEN = re.compile(r"\s*(?:(\d+)|(inv)|([xd])(\d+)|(E)|([-+*/^()]))")


def _tokenize(text: str) -> List[Tuple[str, object]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        num, inv, letter, idx, e, op = m.groups()
        if num is not None:
            out.append(("int", int(num)))
        elif inv:
            out.append(("inv", None))
        elif letter:
            i = int(idx)
            if i < 1:
                raise ParseError(f"variable index must be >= 1: {letter}{idx}")
            out.append((letter, i))
        elif e:
            out.append(("E", None))
        else:
            out.append((op, None))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, nvars: int, precision: int):
        self.toks = tokens
        self.i = 0
        self.n = nvars
        self.N = precision

    def peek(self) -> Optional[str]:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, kind: Optional[str] = None):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of expression")
        t = self.toks[self.i]
        if kind is not None and t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[0]!r}")
        self.i += 1
        return t

    def expr(self) -> DiffOp:
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self) -> DiffOp:
        v = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            rhs = self.unary()
            v = v * rhs if op == "*" else v * self.invert(rhs)
        return v

    def unary(self) -> DiffOp:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self) -> DiffOp:
        v = self.atom()
        if self.peek() == "^":
            self.take()
            k = self.take("int")[1]
            v = v ** k
        return v

    def atom(self) -> DiffOp:
        kind, val = self.take()
        n = self.n
        if kind == "int":
            return DiffOp.scalar(n, val)
        if kind == "x":
            return DiffOp.x(n, val - 1)
        if kind == "d":
            return DiffOp.d(n, val - 1)
        if kind == "E":
            return normal_ordered_exp(self.N, n)
        if kind == "inv":
            self.take("(")
            v = self.expr()
            self.take(")")
            return self.invert(v)
        if kind == "(":
            v = self.expr()
            self.take(")")
            return v
        raise ParseError(f"unexpected token {kind!r}")

    def invert(self, v: DiffOp) -> DiffOp:
        zero = (0,) * self.n
        if set(v.terms) - {zero}:
            raise ParseError("only multiplication operators can be inverted")
        c = v.terms.get(zero, Poly.zero(self.n))
        if c.is_constant():
            if not c.constant_term():
                raise ParseError("division by zero")
            return DiffOp.scalar(self.n, 1 / c.constant_term())
        prec = min(v.precision, self.N)
        try:
            return DiffOp.mult(series_invert(TruncatedSeries(c, prec)))
        except ZeroConstantTerm as exc:
            raise ParseError(f"cannot invert a series with zero constant term: {c}") from exc


def parse_operator(text: str, nvars: Optional[int] = None, precision: int = 8) -> DiffOp:
    """Parse an operator expression; ``nvars`` defaults to the largest index used."""
    if not text or not text.strip():
        raise ParseError("empty expression")
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty expression")
    used = max((v for k, v in toks if k in ("x", "d")), default=1)
    if nvars is None:
        nvars = used
    elif used > nvars:
        raise ParseError(f"index {used} exceeds {nvars} variables")
    if precision < 1:
        raise ParseError("precision must be >= 1")
    p = _Parser(toks, nvars, precision)
    v = p.expr()
    if p.i != len(toks):
        raise ParseError(f"trailing input after token {p.i}")
    return v


def parse_poly(text: str, names=("x", "h")) -> Poly:
    """Parse a polynomial in the named variables, e.g. "x^2 - 3*x*h + 1/2"."""
    if not text or not text.strip():
        raise ParseError("empty polynomial")
    n = len(names)
    pat = re.compile(r"\s*(?:(\d+)|(" + "|".join(re.escape(s) for s in sorted(names, key=len, reverse=True)) + r")|([-+*/^()]))")
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = pat.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            toks.append(("int", int(num)))
        elif name:
            toks.append(("var", names.index(name)))
        else:
            toks.append((op, None))
        pos = m.end()

    i = 0

    def peek():
        return toks[i][0] if i < len(toks) else None

    def take(kind=None):
        nonlocal i
        if i >= len(toks):
            raise ParseError("unexpected end of polynomial")
        t = toks[i]
        if kind is not None and t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[0]!r}")
        i += 1
        return t

    def expr():
        v = term()
        while peek() in ("+", "-"):
            op = take()[0]
            r = term()
            v = v + r if op == "+" else v - r
        return v

    def term():
        v = unary()
        while peek() in ("*", "/"):
            op = take()[0]
            r = unary()
            if op == "*":
                v = v * r
            else:
                if not r.is_constant() or r.is_zero():
                    raise ParseError("polynomials can only be divided by nonzero constants")
                v = v.scale(1 / r.constant_term())
        return v

    def unary():
        if peek() == "-":
            take()
            return -unary()
        return power()

    def power():
        v = atom()
        if peek() == "^":
            take()
            v = v ** take("int")[1]
        return v

    def atom():
        kind, val = take()
        if kind == "int":
            return Poly.const(n, val)
        if kind == "var":
            return Poly.var(n, val)
        if kind == "(":
            v = expr()
            take(")")
            return v
        raise ParseError(f"unexpected token {kind!r}")

    v = expr()
    if i != len(toks):
        raise ParseError("trailing input in polynomial")
    return v
