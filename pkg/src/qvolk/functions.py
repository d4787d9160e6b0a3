"""A small expression language for uniformly differentiable test functions.

Trees are immutable dataclasses. ``eval_fn`` is the pointwise reference
evaluator (exact ring arithmetic at one integer); the vectorized evaluator
used inside Riemann sums lives in :mod:`qvolk.grid`.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cyclotomic import Character, CycloElement, CycloRing
from .padic import PadicScalar, QConfig, padic_exp, q_power, vp_rational


class Node:
    """Base class for expression nodes; supports +, -, * with other nodes and rationals."""

    def __add__(self, other):
        return Sum((self, as_node(other)))

    def __radd__(self, other):
        return Sum((as_node(other), self))

    def __sub__(self, other):
        return Sum((self, Scale(Fraction(-1), as_node(other))))

    def __rsub__(self, other):
        return Sum((as_node(other), Scale(Fraction(-1), self)))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scale(Fraction(other), self)
        return Product((self, other))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scale(Fraction(other), self)
        return Product((other, self))

    def __neg__(self):
        return Scale(Fraction(-1), self)

    def __pow__(self, k: int):
        return Power(self, k)

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True, eq=True)
class Const(Node):
    value: object  # Fraction, PadicScalar or CycloElement

    def __hash__(self):
        return hash(("Const", str(self.value)))


@dataclass(frozen=True)
class Identity(Node):
    pass


@dataclass(frozen=True)
class Power(Node):
    base: Node
    k: int


@dataclass(frozen=True)
class QBracket(Node):
    """x -> [x; q]."""


@dataclass(frozen=True)
class ExpT(Node):
    """x -> exp(t)**x, for v(t) >= 1."""
    t: Fraction


@dataclass(frozen=True)
class QExpT(Node):
    """x -> q**(t*x)."""
    t: Fraction


@dataclass(frozen=True)
class Char(Node):
    """x -> w**x with w = zeta_{p^level}**k."""
    k: int
    level: int


@dataclass(frozen=True)
class LogQ(Node):
    """The constant log q (appears in symbolic derivatives)."""


@dataclass(frozen=True)
class Periodic(Node):
    """x -> values[x mod len(values)]; a locally constant table of ring elements."""
    values: tuple
    level: int

    def __hash__(self):
        return hash(("Periodic", self.level, len(self.values)))


@dataclass(frozen=True)
class Sum(Node):
    terms: tuple


@dataclass(frozen=True)
class Product(Node):
    factors: tuple


@dataclass(frozen=True)
class Scale(Node):
    c: Fraction
    f: Node


@dataclass(frozen=True)
class Shift(Node):
    """x -> f(x + a)."""
    f: Node
    a: int


@dataclass(frozen=True)
class Reflect(Node):
    """x -> f(z - x)."""
    f: Node
    z: int


def as_node(x) -> Node:
    if isinstance(x, Node):
        return x
    if isinstance(x, (int, Fraction, PadicScalar, CycloElement)):
        return Const(Fraction(x) if isinstance(x, int) else x)
    raise TypeError(f"cannot use {type(x).__name__} as a function")


def shift(f: Node, a: int) -> Node:
    return Shift(f, a)


def reflect(f: Node, z: int) -> Node:
    return Reflect(f, z)


def children(f: Node):
    if isinstance(f, (Sum,)):
        return f.terms
    if isinstance(f, Product):
        return f.factors
    if isinstance(f, (Scale, Shift, Reflect)):
        return (f.f,)
    if isinstance(f, Power):
        return (f.base,)
    return ()


def walk(f: Node):
    yield f
    for c in children(f):
        yield from walk(c)


def char_level(f: Node) -> int:
    """Largest character / periodic level occurring in f (0 if none)."""
    level = 0
    for node in walk(f):
        if isinstance(node, (Char, Periodic)):
            level = max(level, node.level)
        elif isinstance(node, Const) and isinstance(node.value, CycloElement):
            level = max(level, node.value.ring.n)
    return level


# ---------------------------------------------------------------------------
# parser

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class ParseEnv:
    p: int = 3
    n: int = 1


_TOKEN = re.compile(r"(\d+)|([A-Za-z_]+)|(\S)")


def _tokenize(src: str):
    out = []
    for m in _TOKEN.finditer(src):
        if m.group(1):
            out.append(("num", m.group(1), m.start()))
        elif m.group(2):
            out.append(("id", m.group(2), m.start()))
        else:
            out.append(("op", m.group(3), m.start()))
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str, env: ParseEnv):
        self.toks = _tokenize(src)
        self.i = 0
        self.env = env

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def at(self, value) -> bool:
        kind, text, _ = self.peek()
        return kind != "end" and text == value

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self) -> Node:
        terms = [self.term()]
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else Scale(Fraction(-1), t))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Node:
        factors = [self.factor()]
        while self.at("*"):
            self.take()
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self) -> Node:
        if self.at("-"):
            self.take()
            inner = self.factor()
            if isinstance(inner, Const) and isinstance(inner.value, Fraction):
                return Const(-inner.value)
            return Scale(Fraction(-1), inner)
        node = self.atom()
        if self.at("^"):
            self.take()
            node = Power(node, self.nat())
        return node

    def nat(self) -> int:
        kind, text, pos = self.take()
        if kind != "num":
            raise ParseError("expected a natural number", pos)
        return int(text)

    def integer(self) -> int:
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        return sign * self.nat()

    def rational(self) -> Fraction:
        num = self.integer()
        if self.at("/"):
            _, _, pos = self.take()
            den = self.nat()
            if den == 0:
                raise ParseError("zero denominator", pos)
            return Fraction(num, den)
        return Fraction(num)

    def atom(self) -> Node:
        kind, text, pos = self.peek()
        if kind == "num":
            return Const(self.rational())
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if kind != "id":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"unexpected {found}", pos)
        self.take()
        p = self.env.p
        if text == "x":
            return Identity()
        if text == "qbr":
            if self.at("("):
                self.take()
                self.expect(")")
            return QBracket()
        if text in ("exp", "qexp"):
            self.expect("(")
            arg_pos = self.peek()[2]
            t = self.rational()
            self.expect(")")
            if text == "exp":
                if t != 0 and vp_rational(t, p) < 1:
                    raise ParseError(f"exp parameter {t} outside the convergence disk v(t) >= 1", arg_pos)
                return ExpT(t)
            if t != 0 and vp_rational(t, p) < 0:
                raise ParseError(f"qexp parameter {t} is not in Z_{p}", arg_pos)
            return QExpT(t)
        if text == "chi":
            self.expect("(")
            k = self.nat()
            level = self.env.n
            if self.at(","):
                self.take()
                level = self.nat()
            self.expect(")")
            return Char(k % p**level, level)
        if text in ("shift", "reflect"):
            self.expect("(")
            inner = self.expr()
            self.expect(",")
            a = self.integer()
            self.expect(")")
            return Shift(inner, a) if text == "shift" else Reflect(inner, a)
        raise ParseError(f"unknown identifier {text!r}", pos)


def parse_fn(src: str, env: ParseEnv = None, **kw) -> Node:
    """Parse DSL text; ``env`` (or keywords p=, n=) fixes p and the default character level."""
    env = env or ParseEnv(**kw)
    if not src.strip():
        raise ParseError("empty expression", 0)
    return _Parser(src, env).parse()


def _fmt_q(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_source(f: Node) -> str:
    """Render a tree back to DSL text (LogQ/Periodic/ring constants get descriptive names)."""
    if isinstance(f, Const):
        v = f.value
        return f"({_fmt_q(v)})" if isinstance(v, Fraction) and v < 0 else _fmt_q(v) if isinstance(v, Fraction) else f"const[{v!r}]"
    if isinstance(f, Identity):
        return "x"
    if isinstance(f, QBracket):
        return "qbr"
    if isinstance(f, ExpT):
        return f"exp({_fmt_q(f.t)})"
    if isinstance(f, QExpT):
        return f"qexp({_fmt_q(f.t)})"
    if isinstance(f, Char):
        return f"chi({f.k},{f.level})"
    if isinstance(f, LogQ):
        return "logq"
    if isinstance(f, Periodic):
        return f"periodic[{f.level}]"
    if isinstance(f, Power):
        return f"({to_source(f.base)})^{f.k}"
    if isinstance(f, Sum):
        return "(" + " + ".join(to_source(t) for t in f.terms) + ")"
    if isinstance(f, Product):
        return "*".join(to_source(t) for t in f.factors)
    if isinstance(f, Scale):
        return f"({_fmt_q(f.c)})*{to_source(f.f)}"
    if isinstance(f, Shift):
        return f"shift({to_source(f.f)},{f.a})"
    if isinstance(f, Reflect):
        return f"reflect({to_source(f.f)},{f.z})"
    raise TypeError(type(f).__name__)


# ---------------------------------------------------------------------------
# pointwise evaluation

def _rational_scalar(c: Fraction, p: int, prec: int) -> PadicScalar:
    if c == 0:
        return PadicScalar.zero(p, prec)
    return PadicScalar.from_rational(c, p, prec - vp_rational(c, p))


def exp_int(t: Fraction, p: int, prec: int) -> int:
    """exp(t) mod p**prec as an integer (a principal unit)."""
    return padic_exp(_rational_scalar(Fraction(t), p, prec)).residue() if t else 1


class Evaluator:
    """Exact evaluation of trees at single integers in a fixed ring."""

    def __init__(self, ring: CycloRing, q: QConfig, prec: int = None):
        self.ring = ring
        self.q = q
        self.p = ring.p
        self.prec = ring.ctx.M if prec is None else prec
        self._exp = {}

    def scalar(self, c) -> CycloElement:
        if isinstance(c, CycloElement):
            return self.ring.embed(c)
        if isinstance(c, PadicScalar):
            return self.ring.scalar(c)
        return self.ring.scalar(_rational_scalar(Fraction(c), self.p, self.prec))

    def integer(self, n: int) -> CycloElement:
        mod = self.p**self.prec
        return self.ring.element([n % mod], 0, self.prec)

    def __call__(self, f: Node, x: int) -> CycloElement:
        ring, p, prec = self.ring, self.p, self.prec
        if isinstance(f, Const):
            return self.scalar(f.value)
        if isinstance(f, Identity):
            return self.integer(x)
        if isinstance(f, Power):
            if f.k == 0:
                return ring.one(prec)
            return self(f.base, x) ** f.k
        if isinstance(f, QBracket):
            return self.integer(self.q.bracket_int(x, prec))
        if isinstance(f, ExpT):
            if f.t not in self._exp:
                self._exp[f.t] = exp_int(f.t, p, prec)
            return self.integer(pow(self._exp[f.t], x, p**prec))
        if isinstance(f, QExpT):
            t = f.t
            if t.denominator == 1:
                return self.integer(self.q.power_int(int(t) * x, prec))
            return ring.scalar(q_power(self.q, t * x, prec))
        if isinstance(f, Char):
            return ring.zeta(Character(f.level, f.k, p).exponent_in(ring) * x, prec)
        if isinstance(f, LogQ):
            return ring.scalar(self.q.log_at(prec))
        if isinstance(f, Periodic):
            return ring.embed(f.values[x % len(f.values)])
        if isinstance(f, Sum):
            acc = self(f.terms[0], x)
            for t in f.terms[1:]:
                acc = acc + self(t, x)
            return acc
        if isinstance(f, Product):
            acc = self(f.factors[0], x)
            for t in f.factors[1:]:
                acc = acc * self(t, x)
            return acc
        if isinstance(f, Scale):
            return self.scalar(f.c) * self(f.f, x)
        if isinstance(f, Shift):
            return self(f.f, x + f.a)
        if isinstance(f, Reflect):
            return self(f.f, f.z - x)
        raise TypeError(f"unknown node {type(f).__name__}")


def eval_fn(f: Node, x: int, ring: CycloRing, q: QConfig = None, prec: int = None) -> CycloElement:
    """f(x) in ``ring``; Shift/Reflect move the argument, negative integers allowed."""
    need = char_level(f)
    if need > ring.n:
        raise ValueError(f"character level {need} exceeds ring level {ring.n}")
    q = q or QConfig(ring.ctx, 0)
    return Evaluator(ring, q, prec)(f, x)


def rational_eval(f: Node, x: int, q: QConfig) -> Optional[Fraction]:
    """f(x) as an exact rational when every node is rational-valued at integers, else None."""
    if isinstance(f, Const):
        return f.value if isinstance(f.value, Fraction) else None
    if isinstance(f, Identity):
        return Fraction(x)
    if isinstance(f, Power):
        b = rational_eval(f.base, x, q)
        return None if b is None else b**f.k
    if isinstance(f, QBracket):
        if q.is_one:
            return Fraction(x)
        Q = 1 + q.q_minus_1
        return (Q**x - 1) / (Q - 1)
    if isinstance(f, QExpT):
        if f.t.denominator != 1:
            return None
        return (1 + q.q_minus_1) ** (int(f.t) * x)
    if isinstance(f, ExpT):
        return Fraction(1) if f.t == 0 else None
    if isinstance(f, Char):
        return Fraction(1) if f.k == 0 else None
    if isinstance(f, (Sum, Product)):
        vals = [rational_eval(t, x, q) for t in children(f)]
        if any(v is None for v in vals):
            return None
        if isinstance(f, Sum):
            return sum(vals, Fraction(0))
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if isinstance(f, Scale):
        v = rational_eval(f.f, x, q)
        return None if v is None else f.c * v
    if isinstance(f, Shift):
        return rational_eval(f.f, x + f.a, q)
    if isinstance(f, Reflect):
        return rational_eval(f.f, f.z - x, q)
    return None


# ---------------------------------------------------------------------------
# symbolic derivative

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def _is_zero(f: Node) -> bool:
    return isinstance(f, Const) and isinstance(f.value, Fraction) and f.value == 0


def _sum(terms):
    terms = [t for t in terms if not _is_zero(t)]
    if not terms:
        return ZERO
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def _prod(factors):
    if any(_is_zero(t) for t in factors):
        return ZERO
    factors = [t for t in factors if t != ONE]
    if not factors:
        return ONE
    return factors[0] if len(factors) == 1 else Product(tuple(factors))


def derivative(f: Node, q: QConfig) -> Node:
    """d/dx f as a new tree (q fixes the constants in [x] and q^(tx))."""
    if isinstance(f, (Const, Char, LogQ, Periodic)):
        return ZERO
    if isinstance(f, Identity):
        return ONE
    if isinstance(f, Power):
        if f.k == 0:
            return ZERO
        inner = derivative(f.base, q)
        rest = f.base if f.k == 2 else Power(f.base, f.k - 1) if f.k > 1 else ONE
        return _prod([Const(Fraction(f.k)), rest, inner])
    if isinstance(f, QBracket):
        if q.is_one:
            return ONE
        # [x] = (q^x - 1)/(q - 1)
        return Scale(1 / q.q_minus_1, Product((LogQ(), QExpT(Fraction(1)))))
    if isinstance(f, ExpT):
        return ZERO if f.t == 0 else Scale(f.t, f)
    if isinstance(f, QExpT):
        if q.is_one or f.t == 0:
            return ZERO
        return Scale(f.t, Product((LogQ(), f)))
    if isinstance(f, Sum):
        return _sum([derivative(t, q) for t in f.terms])
    if isinstance(f, Product):
        terms = []
        for i, fi in enumerate(f.factors):
            d = derivative(fi, q)
            if not _is_zero(d):
                terms.append(_prod(list(f.factors[:i]) + [d] + list(f.factors[i + 1:])))
        return _sum(terms)
    if isinstance(f, Scale):
        d = derivative(f.f, q)
        return ZERO if _is_zero(d) else Scale(f.c, d)
    if isinstance(f, Shift):
        d = derivative(f.f, q)
        return ZERO if _is_zero(d) else Shift(d, f.a)
    if isinstance(f, Reflect):
        d = derivative(f.f, q)
        return ZERO if _is_zero(d) else Scale(Fraction(-1), Reflect(d, f.z))
    raise TypeError(f"unknown node {type(f).__name__}")


def derivative_at_zero(f: Node, ring: CycloRing, q: QConfig = None, prec: int = None) -> CycloElement:
    q = q or QConfig(ring.ctx, 0)
    return eval_fn(derivative(f, q), 0, ring, q, prec)


# ---------------------------------------------------------------------------
# seeded corpus

def random_function(seed: int, p: int = 3, n: int = 1, depth: int = 2) -> Node:
    """A reproducible random tree; constants are p-integral so values stay integral."""
    rng = random.Random(seed)

    def const():
        while True:
            c = Fraction(rng.randint(-4, 4), rng.randint(1, 4))
            if c != 0 and vp_rational(c, p) >= 0:
                return c

    def leaf():
        kind = rng.choice(["x", "const", "exp", "qexp", "qbr", "chi", "pow"])
        if kind == "x":
            return Identity()
        if kind == "const":
            return Const(const())
        if kind == "exp":
            return ExpT(Fraction(p * rng.choice([1, 2, -1])))
        if kind == "qexp":
            return QExpT(Fraction(rng.choice([1, 2, -1])))
        if kind == "qbr":
            return QBracket()
        if kind == "chi":
            level = rng.randint(1, max(n, 1))
            return Char(rng.randrange(p**level), level)
        return Power(Identity(), rng.randint(2, 3))

    def build(d):
        if d == 0:
            return leaf()
        kind = rng.choice(["sum", "prod", "scale", "shift", "reflect", "leaf"])
        if kind == "sum":
            return Sum((build(d - 1), build(d - 1)))
        if kind == "prod":
            return Product((build(d - 1), build(d - 1)))
        if kind == "scale":
            return Scale(const(), build(d - 1))
        if kind == "shift":
            return Shift(build(d - 1), rng.randint(-3, 3))
        if kind == "reflect":
            return Reflect(build(d - 1), rng.randint(0, 4))
        return leaf()

    return build(depth)


__all__ = [
    "Char", "Const", "Evaluator", "ExpT", "Identity", "LogQ", "Node", "ParseEnv", "ParseError",
    "Periodic", "Power", "Product", "QBracket", "QExpT", "Reflect", "Scale", "Shift", "Sum",
    "char_level", "derivative", "derivative_at_zero", "eval_fn", "parse_fn", "random_function",
    "rational_eval", "reflect", "shift", "to_source",
]
