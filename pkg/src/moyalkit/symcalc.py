"""Exact Weyl-symbol algebra over polynomials in ``x``, ``p`` and ``hbar``.

Coefficients are Gaussian rationals (pairs of :class:`fractions.Fraction`);
``hbar`` is a formal generator, never a number.  The star product is the
terminating bidifferential series, so every identity checked here is exact.

A tiny expression language drives the algebra::

    >>> format_symbol(evaluate("star(x, p) - star(p, x)"))
    'i*hbar'
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Mapping, Union

import numpy as np

__all__ = [
    "CQ", "PolySymbol", "ParseError", "UnknownIdentifierError",
    "Num", "Var", "Neg", "Add", "Sub", "Mul", "Pow", "Call",
    "parse_symbol", "eval_expr", "evaluate", "star", "moyal_bracket",
    "baker_bracket", "poisson_bracket", "truncate_order", "format_symbol",
    "X", "P", "HBAR", "I", "ONE",
]

Rational = Union[int, Fraction]


# ----------------------------------------------------------------------------
# Gaussian rationals
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CQ:
    """Exact complex rational ``re + i*im``."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, v) -> "CQ":
        if isinstance(v, CQ):
            return v
        if isinstance(v, (int, Fraction)):
            return cls(Fraction(v))
        if isinstance(v, complex):
            return cls(Fraction(v.real), Fraction(v.imag))
        if isinstance(v, float):
            return cls(Fraction(v))
        raise TypeError(f"cannot use {type(v).__name__} as an exact coefficient")

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, o):
        o = CQ.coerce(o)
        return CQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CQ(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-CQ.coerce(o))

    def __mul__(self, o):
        o = CQ.coerce(o)
        return CQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "CQ":
        return CQ(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))


# ----------------------------------------------------------------------------
# Polynomial symbols
# ----------------------------------------------------------------------------

Exponent = tuple  # (k_x, k_p, k_hbar)


class PolySymbol:
    """Polynomial in ``x``, ``p``, ``hbar`` with exact complex-rational coefficients.

    The term map is canonical (no zero coefficients), so equality is map
    equality.  Instances are immutable.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, object] | None = None):
        clean = {}
        for k, c in (terms or {}).items():
            k = tuple(int(e) for e in k)
            if len(k) != 3 or min(k) < 0:
                raise ValueError(f"bad exponent triple {k!r}")
            c = CQ.coerce(c)
            if c:
                clean[k] = c
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c) -> "PolySymbol":
        return cls({(0, 0, 0): c})

    @classmethod
    def coerce(cls, v) -> "PolySymbol":
        return v if isinstance(v, PolySymbol) else cls.const(v)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        if not isinstance(other, PolySymbol):
            try:
                other = PolySymbol.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"PolySymbol({format_symbol(self)!r})"

    # ring operations
    def __add__(self, other):
        other = PolySymbol.coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, CQ()) + c
        return PolySymbol(out)

    __radd__ = __add__

    def __neg__(self):
        return PolySymbol({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-PolySymbol.coerce(other))

    def __rsub__(self, other):
        return PolySymbol.coerce(other) - self

    def __mul__(self, other):
        other = PolySymbol.coerce(other)
        out: dict = {}
        for (a1, b1, h1), c1 in self._terms.items():
            for (a2, b2, h2), c2 in other._terms.items():
                k = (a1 + a2, b1 + b2, h1 + h2)
                out[k] = out.get(k, CQ()) + c1 * c2
        return PolySymbol(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # calculus and inspection
    def diff(self, var: str, order: int = 1) -> "PolySymbol":
        """Exact partial derivative with respect to ``'x'`` or ``'p'``."""
        axis = {"x": 0, "p": 1}[var]
        out = {}
        for k, c in self._terms.items():
            e = k[axis]
            if e < order:
                continue
            falling = 1
            for j in range(order):
                falling *= e - j
            nk = list(k)
            nk[axis] = e - order
            out[tuple(nk)] = c * falling
        return PolySymbol(out)

    def degree(self, var: str) -> int:
        axis = {"x": 0, "p": 1, "hbar": 2}[var]
        return max((k[axis] for k in self._terms), default=0)

    def phase_degree(self) -> int:
        """Largest ``k_x + k_p`` over the terms."""
        return max((k[0] + k[1] for k in self._terms), default=0)

    def conjugate(self) -> "PolySymbol":
        return PolySymbol({k: c.conjugate() for k, c in self._terms.items()})

    def substitute_hbar(self, hbar: float) -> dict:
        """Collapse ``hbar`` to a number: returns ``{(k_x, k_p): complex}``."""
        out: dict = {}
        for (a, b, h), c in self._terms.items():
            out[(a, b)] = out.get((a, b), 0j) + complex(c) * hbar ** h
        return {k: v for k, v in out.items() if v != 0}

    def evaluate(self, x, p, hbar: float = 1.0):
        """Evaluate on broadcastable arrays ``x`` and ``p``."""
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        out = np.zeros(np.broadcast(x, p).shape, dtype=complex)
        for (a, b), c in self.substitute_hbar(hbar).items():
            out = out + c * x ** a * p ** b
        return out


ONE = PolySymbol.const(1)
X = PolySymbol({(1, 0, 0): 1})
P = PolySymbol({(0, 1, 0): 1})
HBAR = PolySymbol({(0, 0, 1): 1})
I = PolySymbol({(0, 0, 0): CQ(0, 1)})


# ----------------------------------------------------------------------------
# Star product and brackets
# ----------------------------------------------------------------------------

def _bidiff(a: PolySymbol, b: PolySymbol, n: int) -> PolySymbol:
    # Lambda^n(a, b) with left derivatives on a, right derivatives on b
    total = PolySymbol()
    for r in range(n + 1):
        left = a.diff("x", n - r).diff("p", r)
        if left.is_zero():
            continue
        right = b.diff("p", n - r).diff("x", r)
        if right.is_zero():
            continue
        total = total + (left * right) * (comb(n, r) * (-1) ** r)
    return total


def star(a: PolySymbol, b: PolySymbol) -> PolySymbol:
    """Moyal star product ``a * exp(i hbar/2 (<-d_x ->d_p - <-d_p ->d_x)) * b``."""
    a, b = PolySymbol.coerce(a), PolySymbol.coerce(b)
    order = min(a.phase_degree(), b.phase_degree())
    result = PolySymbol()
    half_i = CQ(0, Fraction(1, 2))
    for n in range(order + 1):
        term = _bidiff(a, b, n)
        if term.is_zero():
            continue
        coeff = CQ(1)
        for _ in range(n):
            coeff = coeff * half_i
        coeff = coeff * Fraction(1, factorial(n))
        result = result + term * HBAR ** n * PolySymbol.const(coeff)
    return result


def _divide_by_i_hbar(a: PolySymbol) -> PolySymbol:
    out = {}
    minus_i = CQ(0, -1)
    for (kx, kp, kh), c in a:
        if kh == 0:
            raise ArithmeticError(
                "star commutator has an hbar-free term; star product is broken")
        out[(kx, kp, kh - 1)] = c * minus_i
    return PolySymbol(out)


def moyal_bracket(a: PolySymbol, b: PolySymbol) -> PolySymbol:
    """``(a*b - b*a) / (i hbar)``, computed exactly."""
    return _divide_by_i_hbar(star(a, b) - star(b, a))


def baker_bracket(a: PolySymbol, b: PolySymbol) -> PolySymbol:
    """Jordan product ``(a*b + b*a) / 2``."""
    return (star(a, b) + star(b, a)) * PolySymbol.const(Fraction(1, 2))


def poisson_bracket(a: PolySymbol, b: PolySymbol) -> PolySymbol:
    a, b = PolySymbol.coerce(a), PolySymbol.coerce(b)
    return a.diff("x") * b.diff("p") - a.diff("p") * b.diff("x")


def truncate_order(a: PolySymbol, n: int) -> PolySymbol:
    """Drop every term whose power of ``hbar`` exceeds ``n``."""
    if n < 0:
        raise ValueError("truncation order must be non-negative")
    return PolySymbol({k: c for k, c in a if k[2] <= n})


# ----------------------------------------------------------------------------
# Expression language
# ----------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class UnknownIdentifierError(ParseError):
    pass


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str  # 'x', 'p', 'hbar' or 'i'


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


_ATOMS = {"x", "p", "hbar", "i"}
_CALLS = {"star": 2, "mb": 2, "bb": 2, "pb": 2, "truncate": 2}


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        col = i + 1
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            lit = text[i:j]
            if lit.count(".") > 1:
                raise ParseError(f"malformed number {lit!r}", col)
            toks.append(("num", lit, col))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], col))
            i = j
        elif ch in "+-*/^(),":
            toks.append((ch, ch, col))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", col)
    toks.append(("end", "", n + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok[0] != kind:
            want = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {want}, found {got}", tok[2])
        self.pos += 1
        return tok

    def parse(self):
        node = self.expr()
        self.take("end")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "*":
            self.take()
            node = Mul(node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.unary())
        if self.peek()[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        while self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num" or "." in tok[1]:
                raise ParseError("exponent must be a non-negative integer literal", tok[2])
            self.take()
            node = Pow(node, int(tok[1]))
        return node

    def atom(self):
        tok = self.peek()
        kind, text, col = tok
        if kind == "num":
            self.take()
            value = Fraction(text)
            if self.peek()[0] == "/":
                self.take()
                den = self.take("num")
                if "." in den[1] or Fraction(den[1]) == 0:
                    raise ParseError("denominator must be a non-zero integer", den[2])
                value = value / Fraction(den[1])
            return Num(value)
        if kind == "name":
            self.take()
            if self.peek()[0] == "(":
                if text not in _CALLS:
                    raise UnknownIdentifierError(f"unknown function {text!r}", col)
                self.take("(")
                args = [self.expr()]
                while self.peek()[0] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                if len(args) != _CALLS[text]:
                    raise ParseError(
                        f"{text} takes {_CALLS[text]} arguments, got {len(args)}", col)
                return Call(text, tuple(args))
            if text not in _ATOMS:
                raise UnknownIdentifierError(f"unknown identifier {text!r}", col)
            return Var(text)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        got = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {got}", col)


def parse_symbol(text: str):
    """Parse an expression into an AST of :class:`Num`, :class:`Var`, ... nodes."""
    if not text or not text.strip():
        raise ParseError("empty expression", 1)
    return _Parser(text).parse()


_VARS = {"x": X, "p": P, "hbar": HBAR, "i": I}


def eval_expr(node) -> PolySymbol:
    if isinstance(node, Num):
        return PolySymbol.const(node.value)
    if isinstance(node, Var):
        return _VARS[node.name]
    if isinstance(node, Neg):
        return -eval_expr(node.operand)
    if isinstance(node, Add):
        return eval_expr(node.left) + eval_expr(node.right)
    if isinstance(node, Sub):
        return eval_expr(node.left) - eval_expr(node.right)
    if isinstance(node, Mul):
        return eval_expr(node.left) * eval_expr(node.right)
    if isinstance(node, Pow):
        return eval_expr(node.base) ** node.exponent
    if isinstance(node, Call):
        a, b = (eval_expr(arg) for arg in node.args)
        if node.name == "truncate":
            return truncate_order(a, _as_order(b))
        return {"star": star, "mb": moyal_bracket, "bb": baker_bracket,
                "pb": poisson_bracket}[node.name](a, b)
    raise TypeError(f"not an expression node: {node!r}")


def _as_order(sym: PolySymbol) -> int:
    terms = sym.terms
    if not terms:
        return 0
    c = terms.get((0, 0, 0))
    if len(terms) != 1 or c is None or c.im or c.re.denominator != 1 or c.re < 0:
        raise ValueError("truncate order must be a non-negative integer constant")
    return int(c.re)


def evaluate(text: str) -> PolySymbol:
    return eval_expr(parse_symbol(text))


# ----------------------------------------------------------------------------
# Formatting
# ----------------------------------------------------------------------------

def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"({q.numerator}/{q.denominator})"


def _monomial(k) -> list:
    parts = []
    for name, e in zip(("x", "p", "hbar"), k):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return parts


def _term(c: CQ, k) -> tuple:
    """Return (sign, body) for one term; sign is '+' or '-'."""
    mono = _monomial(k)
    if c.im == 0 or c.re == 0:
        real = c.im == 0
        mag = abs(c.re if real else c.im)
        sign = "-" if (c.re if real else c.im) < 0 else "+"
        if real and not mono:
            return sign, str(mag)
        factors = [] if mag == 1 else [_frac(mag)]
        if not real:
            factors.append("i")
        factors += mono
        return sign, "*".join(factors) if factors else "1"
    inner = f"{_frac(c.re)} {'-' if c.im < 0 else '+'} {_frac(abs(c.im))}*i"
    return "+", "*".join([f"({inner})"] + mono)


def format_symbol(a: PolySymbol) -> str:
    """Canonical text form, ordered by hbar power then descending phase degree."""
    if a.is_zero():
        return "0"
    keys = sorted(a.terms, key=lambda k: (k[2], -(k[0] + k[1]), -k[0]))
    out = []
    for idx, k in enumerate(keys):
        sign, body = _term(a.terms[k], k)
        if idx == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def random_symbol(rng: np.random.Generator, max_degree: int = 4,
                  n_terms: int = 4, with_hbar: bool = False) -> PolySymbol:
    """Random polynomial with small Gaussian-rational coefficients (test helper)."""
    terms = {}
    for _ in range(n_terms):
        kx = int(rng.integers(0, max_degree + 1))
        kp = int(rng.integers(0, max_degree - kx + 1))
        kh = int(rng.integers(0, 2)) if with_hbar else 0
        re = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        im = Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
        terms[(kx, kp, kh)] = CQ(re, im)
    return PolySymbol(terms)


def from_coefficients(coeffs: Iterable[Rational]) -> PolySymbol:
    """Potential ``sum_k c_k x^k`` from a coefficient list (constant first)."""
    return PolySymbol({(k, 0, 0): Fraction(c) for k, c in enumerate(coeffs)})
