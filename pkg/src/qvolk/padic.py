"""Finite-precision arithmetic in Q_p.

A :class:`PadicScalar` is ``u * p**v`` known modulo ``p**A``. Precision is
tracked interval-style: addition keeps the smaller absolute precision,
multiplication and division keep the smaller relative precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

INF = math.inf


class PrecisionError(ArithmeticError):
    """Raised when an operation leaves no known digits."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_rational(x, p: int):
    x = Fraction(x)
    if x == 0:
        return INF
    return vp(x.numerator, p) - vp(x.denominator, p)


def _ilog(k: int, p: int) -> int:
    e = 0
    while p ** (e + 1) <= k:
        e += 1
    return e


def legendre(k: int, p: int) -> int:
    """v_p(k!)."""
    v, q = 0, p
    while q <= k:
        v += k // q
        q *= p
    return v


@dataclass(frozen=True)
class PrimeContext:
    p: int
    M: int = 16

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.p < 3:
            raise ValueError("p=2 is not supported (exp/log convergence disk differs)")
        if self.M < 4:
            raise ValueError(f"precision M={self.M} must be at least 4")

    def with_precision(self, M: int) -> "PrimeContext":
        return PrimeContext(self.p, M)


class PadicScalar:
    __slots__ = ("p", "v", "u", "A")

    def __init__(self, p: int, v, u: int, A: int):
        self.p = p
        self.v = v
        self.u = u
        self.A = A

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, p: int, A: int) -> "PadicScalar":
        return cls(p, INF, 0, A)

    @classmethod
    def from_parts(cls, p: int, n: int, e: int, A: int) -> "PadicScalar":
        """The value n * p**e known modulo p**A."""
        k = A - e
        if k <= 0 or n == 0:
            return cls.zero(p, A)
        r = n % p**k
        if r == 0:
            return cls.zero(p, A)
        v0 = vp(r, p)
        return cls(p, e + v0, r // p**v0, A)

    @classmethod
    def from_rational(cls, x, p: int, rel: int) -> "PadicScalar":
        """Exact rational x with relative precision rel (absolute M for 0)."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, rel)
        v = vp(x.numerator, p) - vp(x.denominator, p)
        num = x.numerator // p ** max(v, 0)
        den = x.denominator // p ** max(-v, 0)
        mod = p**rel
        return cls(p, v, num * pow(den, -1, mod) % mod, v + rel)

    # -- basic properties -------------------------------------------------
    def is_zero(self) -> bool:
        return self.v == INF

    @property
    def rel(self):
        return INF if self.is_zero() else self.A - self.v

    def valuation(self):
        return self.v

    def norm(self) -> float:
        return 0.0 if self.is_zero() else float(self.p) ** (-self.v)

    def lift(self) -> Fraction:
        """A rational representative (u * p**v)."""
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.u) * Fraction(self.p) ** self.v

    def residue(self) -> int:
        """Integer representative mod p**A; requires v >= 0."""
        if self.is_zero():
            return 0
        if self.v < 0:
            raise ValueError("element is not integral")
        return self.u * self.p**self.v % self.p**self.A

    def scaled(self, e: int) -> int:
        """Integer n with self == n * p**e (mod p**A); requires e <= v."""
        if self.is_zero():
            return 0
        if e > self.v:
            raise ValueError("offset exceeds valuation")
        return self.u * self.p ** (self.v - e)

    def truncate(self, A: int) -> "PadicScalar":
        if A >= self.A:
            return self
        if self.is_zero():
            return PadicScalar.zero(self.p, A)
        return PadicScalar.from_parts(self.p, self.u, self.v, A)

    def digits(self) -> list:
        """Little-endian base-p digits of the unit part, trailing zeros trimmed."""
        if self.is_zero():
            return []
        out, n = [], self.u
        for _ in range(self.A - self.v):
            n, d = divmod(n, self.p)
            out.append(d)
        while out and out[-1] == 0:
            out.pop()
        return out

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, (int, Fraction)):
            x = Fraction(other)
            if x == 0:
                return PadicScalar.zero(self.p, self.A if not self.is_zero() else self.A)
            vx = vp_rational(x, self.p)
            rel = self.rel if not self.is_zero() else 0
            R = max(rel, self.A - vx, 1)
            return PadicScalar.from_rational(x, self.p, R)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        A = min(self.A, other.A)
        e = min(self.v if not self.is_zero() else self.A,
                other.v if not other.is_zero() else other.A)
        n = (self.u * self.p ** (self.v - e) if not self.is_zero() else 0) + \
            (other.u * self.p ** (other.v - e) if not other.is_zero() else 0)
        return _checked(PadicScalar.from_parts(self.p, n, e, A))

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        return PadicScalar(self.p, self.v, (-self.u) % self.p ** (self.A - self.v), self.A)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.p
        if self.is_zero() and other.is_zero():
            return _checked(PadicScalar.zero(p, self.A + other.A))
        if self.is_zero():
            return _checked(PadicScalar.zero(p, self.A + other.v))
        if other.is_zero():
            return _checked(PadicScalar.zero(p, other.A + self.v))
        rel = min(self.rel, other.rel)
        return PadicScalar(p, self.v + other.v, self.u * other.u % p**rel, self.v + other.v + rel)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by a p-adic zero")
        p = self.p
        if self.is_zero():
            return _checked(PadicScalar.zero(p, self.A - other.v))
        rel = min(self.rel, other.rel)
        mod = p**rel
        v = self.v - other.v
        return PadicScalar(p, v, self.u * pow(other.u, -1, mod) % mod, v + rel)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return PadicScalar.from_rational(1, self.p, self.rel) / self ** (-k)
        if k == 0:
            return PadicScalar.from_rational(1, self.p, self.rel if not self.is_zero() else self.A)
        if self.is_zero():
            return _checked(PadicScalar.zero(self.p, self.A * k))
        rel = self.rel
        return PadicScalar(self.p, self.v * k, pow(self.u, k, self.p**rel), self.v * k + rel)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"{format_digits(self)} mod {self.p}^{self.A}"

    def __str__(self):
        return format_digits(self)


def _checked(x: PadicScalar) -> PadicScalar:
    if x.is_zero() and x.A <= 0:
        raise PrecisionError(f"precision exhausted (absolute precision {x.A})")
    return x


def from_rational(num: int, den: int, ctx: PrimeContext) -> PadicScalar:
    """num/den with relative precision ctx.M (zero gets absolute precision M)."""
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    return PadicScalar.from_rational(Fraction(num, den), ctx.p, ctx.M)


def arith(a: PadicScalar, b: PadicScalar, op: str) -> PadicScalar:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def format_digits(x: PadicScalar) -> str:
    """Render as ``d0 + d1*p + d2*p^2 ...`` with p-powers evaluated."""
    if x.is_zero():
        return "0"
    terms = [str(d) if i == 0 else f"{d}*{x.p**i}" for i, d in enumerate(x.digits()) if d]
    body = " + ".join(terms)
    if x.v == 0:
        return body
    return f"{x.p}^{x.v} * ({body})"


# -- exp / log ---------------------------------------------------------------

def padic_log(a: PadicScalar) -> PadicScalar:
    """Logarithm of a principal unit via the alternating series."""
    p = a.p
    one = PadicScalar.from_rational(1, p, a.A)
    x = a - one
    if a.is_zero() or a.v != 0 or (not x.is_zero() and x.v < 1):
        raise ValueError("padic_log needs a principal unit (v(a-1) >= 1)")
    A = a.A
    if x.is_zero():
        return PadicScalar.zero(p, A)
    X, vx = x.scaled(x.v), x.v
    X = X * p**vx
    mod = p**A
    total, k = 0, 1
    # floor(log_p k) bounds v_p(j) for every j >= k, so the cutoff is final
    while k * vx - _ilog(k, p) < A:
        vk = vp(k, p)
        term = (X**k // p**vk) * pow(k // p**vk, -1, mod)
        total += term if k % 2 else -term
        k += 1
    return PadicScalar.from_parts(p, total % mod, 0, A)


def padic_exp(a: PadicScalar) -> PadicScalar:
    """Exponential on the disk v(a) >= 1."""
    p = a.p
    A = a.A
    if a.is_zero():
        return PadicScalar.from_rational(1, p, A)
    if a.v < 1:
        raise ValueError("padic_exp needs v(a) >= 1")
    X = a.u * p**a.v
    mod = p**A
    total, k = 0, 0
    # lower bound for v(a^k/k!) is k*(v(a) - 1/(p-1))
    bound = Fraction(a.v) - Fraction(1, p - 1)
    fact = 1
    while k == 0 or k * bound < A:
        if k:
            fact *= k
        vf = legendre(k, p)
        term = (X**k // p**vf) * pow(fact // p**vf, -1, mod)
        total += term
        k += 1
    return PadicScalar.from_parts(p, total % mod, 0, A)


# -- q parameter ---------------------------------------------------------------

class QConfig:
    """The principal unit q = 1 + (q-1) with cached log q and (q-1)/log q.

    ``q_minus_1`` is an exact rational; higher-precision copies of every
    derived scalar are available through the ``*_at`` methods.
    """

    def __init__(self, ctx: PrimeContext, q_minus_1=0):
        self.ctx = ctx
        self.q_minus_1 = Fraction(q_minus_1)
        self.is_one = self.q_minus_1 == 0
        if not self.is_one and vp_rational(self.q_minus_1, ctx.p) < 1:
            raise ValueError(f"q-1={self.q_minus_1} is not in p*Z_p (need |q-1|_p < 1)")
        self.vq = INF if self.is_one else vp_rational(self.q_minus_1, ctx.p)
        self.q = self.q_at(ctx.M)
        self.log_q = self.log_at(ctx.M)
        self.A_scalar = self.A_at(ctx.M)

    def __repr__(self):
        return f"QConfig(p={self.ctx.p}, q=1+{self.q_minus_1})"

    @property
    def p(self):
        return self.ctx.p

    def q_int(self, prec: int) -> int:
        """Integer representative of q mod p**prec."""
        mod = self.p**prec
        r = self.q_minus_1
        return (1 + r.numerator * pow(r.denominator, -1, mod)) % mod

    @lru_cache(maxsize=None)
    def q_at(self, prec: int) -> PadicScalar:
        return PadicScalar.from_rational(1 + self.q_minus_1, self.p, prec)

    @lru_cache(maxsize=None)
    def log_at(self, prec: int) -> PadicScalar:
        if self.is_one:
            return PadicScalar.zero(self.p, prec)
        return padic_log(self.q_at(prec))

    @lru_cache(maxsize=None)
    def A_at(self, prec: int) -> PadicScalar:
        """(q-1)/log q, with relative precision prec - v(q-1)."""
        if self.is_one:
            return PadicScalar.from_rational(1, self.p, prec)
        qm1 = PadicScalar.from_rational(self.q_minus_1, self.p, prec)
        return qm1 / self.log_at(prec + self.vq)

    def bracket_int(self, x: int, prec: int) -> int:
        """[x; q] mod p**prec for an integer x >= 0, exact."""
        if self.is_one:
            return x % self.p**prec
        vq = self.vq
        big = self.p ** (prec + vq)
        Q = self.q_int(prec + vq)
        num = (pow(Q, x, big) - 1) % big
        qm1 = (Q - 1) % big
        unit = (qm1 // self.p**vq) % self.p**prec
        return (num // self.p**vq) * pow(unit, -1, self.p**prec) % self.p**prec

    def power_int(self, x: int, prec: int) -> int:
        """q**x mod p**prec for any integer x."""
        return pow(self.q_int(prec), x, self.p**prec)


def q_bracket(x: int, q: QConfig, prec: int = None) -> PadicScalar:
    """[x; q] = 1 + q + ... + q^(x-1) for x >= 0 (x itself when q = 1)."""
    if x < 0:
        raise ValueError("q_bracket takes x >= 0")
    prec = q.ctx.M if prec is None else prec
    if q.is_one:
        return PadicScalar.from_rational(x, q.p, prec) if x else PadicScalar.zero(q.p, prec)
    return PadicScalar.from_parts(q.p, q.bracket_int(x, prec), 0, prec)


def q_power(q: QConfig, x, prec: int = None) -> PadicScalar:
    """q**x for x in Z_p; integers use exact modular powering, others exp(x log q)."""
    prec = q.ctx.M if prec is None else prec
    if isinstance(x, int):
        return PadicScalar.from_parts(q.p, q.power_int(x, prec), 0, prec)
    if isinstance(x, Fraction):
        if vp_rational(x, q.p) < 0:
            raise ValueError("q_power exponent must lie in Z_p")
        if x.denominator == 1:
            return q_power(q, int(x), prec)
        x = PadicScalar.from_rational(x, q.p, prec)
    if not x.is_zero() and x.v < 0:
        raise ValueError("q_power exponent must lie in Z_p")
    if q.is_one:
        return PadicScalar.from_rational(1, q.p, prec)
    return padic_exp(x * q.log_at(prec))
