"""Arithmetic in Q_p(zeta) for zeta a primitive p^n-th root of unity.

Elements are fixed-point integer vectors: ``p**e * sum_i c_i zeta**i`` with
every coefficient known modulo ``p**A`` (one absolute precision per element).
Products are folded through the group ring Z[X]/(X^(p^n) - 1) and then
reduced modulo Phi_{p^n}.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .padic import INF, PadicScalar, PrecisionError, PrimeContext, vp


class IndistinguishableFromZero(ArithmeticError):
    """The element is zero at its working precision; ``precision`` bounds its valuation."""

    def __init__(self, precision):
        super().__init__(f"indistinguishable from zero at precision {precision}")
        self.precision = precision


@dataclass(frozen=True)
class CycloRing:
    ctx: PrimeContext
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("level n must be >= 0")

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def D(self) -> int:
        """Order of the root-of-unity group C_{p^n}."""
        return self.p**self.n

    @property
    def d(self) -> int:
        return 1 if self.n == 0 else self.p ** (self.n - 1) * (self.p - 1)

    @property
    def step(self) -> int:
        return 1 if self.n == 0 else self.p ** (self.n - 1)

    @property
    def modulus(self) -> list:
        """Coefficients (little-endian) of Phi_{p^n}."""
        if self.n == 0:
            return [-1, 1]
        out = [0] * (self.d + 1)
        for j in range(self.p):
            out[j * self.step] = 1
        return out

    def reduce_group(self, vec) -> list:
        """Map a group-ring vector (indices read mod D) to its reduced length-d form."""
        D, d, step, p = self.D, self.d, self.step, self.p
        if len(vec) == D:
            vec = list(vec)
        else:
            folded = [0] * D
            for i, c in enumerate(vec):
                folded[i % D] += c
            vec = folded
        if self.n == 0:
            return [sum(vec)]
        for i in range(d, D):
            c = vec[i]
            if c:
                base = i - d
                for j in range(p - 1):
                    vec[base + j * step] -= c
        return vec[:d]

    # -- constructors -----------------------------------------------------
    def element(self, coeffs, e: int = 0, A: int = None) -> "CycloElement":
        A = self.ctx.M if A is None else A
        coeffs = list(coeffs) + [0] * (self.d - len(coeffs))
        if len(coeffs) > self.d:
            raise ValueError("too many coefficients; use from_group")
        return CycloElement(self, e, A, coeffs)

    def from_group(self, vec, e: int, A: int) -> "CycloElement":
        return CycloElement(self, e, A, self.reduce_group(vec))

    def zero(self, A: int = None) -> "CycloElement":
        return self.element([0], 0, self.ctx.M if A is None else A)

    def one(self, A: int = None) -> "CycloElement":
        return self.element([1], 0, A)

    def zeta(self, k: int, A: int = None) -> "CycloElement":
        """zeta_{p^n}**k."""
        vec = [0] * self.D
        vec[k % self.D] = 1
        return self.from_group(vec, 0, self.ctx.M if A is None else A)

    def scalar(self, x) -> "CycloElement":
        if isinstance(x, CycloElement):
            return self.embed(x)
        if not isinstance(x, PadicScalar):
            x = PadicScalar.from_rational(Fraction(x), self.p, self.ctx.M)
        if x.is_zero():
            return self.element([0], x.A, x.A)
        return self.element([x.u], x.v, x.A)

    def embed(self, a: "CycloElement") -> "CycloElement":
        """Move an element of a lower-level ring into this one."""
        if (a.ring.p, a.ring.n) == (self.p, self.n):
            return a
        if a.ring.p != self.p or a.ring.n > self.n:
            raise ValueError("cannot embed a higher-level element")
        scale = self.p ** (self.n - a.ring.n)
        vec = [0] * self.D
        for i, c in enumerate(a.coeffs):
            vec[(i * scale) % self.D] += c
        return self.from_group(vec, a.e, a.A)


@lru_cache(maxsize=None)
def make_ring(ctx: PrimeContext, n: int) -> CycloRing:
    return CycloRing(ctx, n)


class CycloElement:
    __slots__ = ("ring", "e", "A", "coeffs")

    def __init__(self, ring: CycloRing, e: int, A: int, coeffs):
        p = ring.p
        K = A - e
        if K <= 0:
            coeffs, e = [0] * ring.d, A
        else:
            mod = p**K
            coeffs = [c % mod for c in coeffs]
            if not any(coeffs):
                e = A
            else:
                while all(c % p == 0 for c in coeffs):
                    coeffs = [c // p for c in coeffs]
                    e += 1
        self.ring = ring
        self.e = e
        self.A = A
        self.coeffs = tuple(coeffs)

    @property
    def K(self) -> int:
        return self.A - self.e

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def coefficient(self, i: int) -> PadicScalar:
        return PadicScalar.from_parts(self.ring.p, self.coeffs[i], self.e, self.A)

    def as_scalar(self) -> PadicScalar:
        """The value as a base-field scalar; higher coefficients must vanish."""
        if any(self.coeffs[1:]):
            raise ValueError("element does not lie in Q_p")
        return self.coefficient(0)

    def is_scalar(self) -> bool:
        return not any(self.coeffs[1:])

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, CycloElement):
            # rings built over different default precisions are the same field
            if other.ring == self.ring or (other.ring.p, other.ring.n) == (self.ring.p, self.ring.n):
                return other
            if other.ring.p == self.ring.p and other.ring.n < self.ring.n:
                return self.ring.embed(other)
            raise ValueError("elements live in different rings")
        if isinstance(other, PadicScalar):
            return self.ring.scalar(other)
        if isinstance(other, (int, Fraction)):
            x = Fraction(other)
            if x == 0:
                return self.ring.element([0], self.A, self.A)
            rel = max(self.K, 1) + max(0, self.A)
            return self.ring.scalar(PadicScalar.from_rational(x, self.ring.p, rel + abs(x.numerator).bit_length()))
        return NotImplemented

    def _binary_ring(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return None, None
        if other.ring.n > self.ring.n:
            return other.ring.embed(self), other
        return self, other

    def __add__(self, other):
        a, b = self._binary_ring(other)
        if a is None:
            return NotImplemented
        p = a.ring.p
        e = min(a.e, b.e)
        A = min(a.A, b.A)
        sa, sb = p ** (a.e - e), p ** (b.e - e)
        coeffs = [x * sa + y * sb for x, y in zip(a.coeffs, b.coeffs)]
        return CycloElement(a.ring, e, A, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return CycloElement(self.ring, self.e, self.A, [-c for c in self.coeffs])

    def __sub__(self, other):
        a, b = self._binary_ring(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._binary_ring(other)
        if a is None:
            return NotImplemented
        return b + (-a)

    def __mul__(self, other):
        a, b = self._binary_ring(other)
        if a is None:
            return NotImplemented
        ring = a.ring
        e = a.e + b.e
        A = min(a.e + b.A, b.e + a.A)
        if a.is_zero() or b.is_zero():
            return CycloElement(ring, A, A, [0])
        D = ring.D
        vec = [0] * D
        bc = [(j, y) for j, y in enumerate(b.coeffs) if y]
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in bc:
                    vec[(i + j) % D] += x * y
        return CycloElement(ring, e, A, ring.reduce_group(vec))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ring.one(max(self.K, 1))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, CycloElement):
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            other = PadicScalar.from_rational(Fraction(other), self.ring.p, self.K + 64)
        if isinstance(other, PadicScalar):
            return self.div_scalar(other)
        return NotImplemented

    def div_scalar(self, s: PadicScalar) -> "CycloElement":
        if s.is_zero():
            raise ZeroDivisionError("division by a p-adic zero")
        p = self.ring.p
        if self.is_zero():
            return CycloElement(self.ring, self.A - s.v, self.A - s.v, [0])
        rel = min(self.K, s.rel)
        mod = p**rel
        inv = pow(s.u, -1, mod)
        e = self.e - s.v
        return CycloElement(self.ring, e, e + rel, [c * inv for c in self.coeffs])

    def times_zeta(self, k: int) -> "CycloElement":
        """Multiply by zeta**k (exact; only permutes and folds coefficients)."""
        D = self.ring.D
        vec = [0] * D
        for i, c in enumerate(self.coeffs):
            if c:
                vec[(i + k) % D] += c
        return CycloElement(self.ring, self.e, self.A, self.ring.reduce_group(vec))

    def conj(self, j: int) -> "CycloElement":
        """Galois conjugate zeta -> zeta**j for j prime to p."""
        if j % self.ring.p == 0:
            raise ValueError("conjugation exponent must be prime to p")
        D = self.ring.D
        vec = [0] * D
        for i, c in enumerate(self.coeffs):
            if c:
                vec[(i * j) % D] += c
        return CycloElement(self.ring, self.e, self.A, self.ring.reduce_group(vec))

    def _conjugate_product(self) -> "CycloElement":
        prod = self.ring.one(self.K + max(self.e, 0) + 1)
        for j in range(2, self.ring.D):
            if j % self.ring.p:
                prod = prod * self.conj(j)
        return prod

    def norm(self) -> PadicScalar:
        """N_{Q_p(zeta)/Q_p}, the product of all conjugates."""
        return (self * self._conjugate_product()).coefficient(0)

    def inverse(self) -> "CycloElement":
        if self.ring.n == 0:
            return self.ring.scalar(1 / self.coefficient(0)) if not self.is_zero() else _raise_zero()
        prod = self._conjugate_product()
        nrm = (self * prod).coefficient(0)
        if nrm.is_zero():
            raise ZeroDivisionError("element is not invertible at working precision")
        return prod.div_scalar(nrm)

    def ext_valuation(self) -> Fraction:
        """Valuation normalized by v(p) = 1, from the (1 - zeta)-adic expansion."""
        if self.is_zero():
            raise IndistinguishableFromZero(self.A)
        ring = self.ring
        p, d, K = ring.p, ring.d, self.K
        mod = p**K
        best = None
        for j in range(d):
            b = sum(c * comb(i, j) for i, c in enumerate(self.coeffs) if i >= j and c) % mod
            if b:
                cand = vp(b, p) + Fraction(j, d)
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise IndistinguishableFromZero(self.A)
        return self.e + best

    def valuation_or_cap(self):
        """(valuation, exact) where exact=False means zero at precision valuation."""
        try:
            return self.ext_valuation(), True
        except IndistinguishableFromZero as z:
            return Fraction(z.precision), False

    def truncate(self, A: int) -> "CycloElement":
        if A >= self.A:
            return self
        return CycloElement(self.ring, self.e, A, self.coeffs)

    def __eq__(self, other):
        try:
            diff = self - other
        except (TypeError, ValueError):
            return NotImplemented
        if diff is NotImplemented:
            return NotImplemented
        return diff.is_zero()

    __hash__ = None

    def __repr__(self):
        terms = []
        for i in range(self.ring.d):
            c = self.coefficient(i)
            if c.is_zero():
                continue
            terms.append(f"({c})" + ("" if i == 0 else f"*z^{i}" if i > 1 else "*z"))
        body = " + ".join(terms) or "0"
        return f"{body} mod Phi({self.ring.p}^{self.ring.n}), O({self.ring.p}^{self.A})"


def _raise_zero():
    raise ZeroDivisionError("division by a p-adic zero")


@dataclass(frozen=True)
class Character:
    """w = zeta_{p^n}**k, acting by x -> w**x."""
    n: int
    k: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "k", self.k % self.p**self.n)

    def __mul__(self, other: "Character") -> "Character":
        if other.n > self.n:
            return other * self
        k = self.k + other.k * self.p ** (self.n - other.n)
        return Character(self.n, k, self.p)

    def inverse(self) -> "Character":
        return Character(self.n, -self.k, self.p)

    def exponent_in(self, ring: CycloRing) -> int:
        """Exponent of zeta_{ring} representing w."""
        if self.n > ring.n:
            raise ValueError(f"character level {self.n} exceeds ring level {ring.n}")
        return self.k * ring.p ** (ring.n - self.n)

    def value(self, ring: CycloRing) -> CycloElement:
        return ring.zeta(self.exponent_in(ring))

    def as_pair(self):
        return (self.n, self.k)


def enumerate_characters(ring: CycloRing, n: int = None) -> list:
    """All characters of C_{p^n} (default: the ring's level), ordered by exponent."""
    n = ring.n if n is None else n
    return [Character(n, k, ring.p) for k in range(ring.p**n)]


def char_eval(w: Character, x: int, ring: CycloRing) -> CycloElement:
    return ring.zeta(w.exponent_in(ring) * x)


def ext_valuation(a: CycloElement) -> Fraction:
    return a.ext_valuation()


__all__ = [
    "Character", "CycloElement", "CycloRing", "IndistinguishableFromZero",
    "char_eval", "enumerate_characters", "ext_valuation", "make_ring",
    "INF", "PrecisionError",
]
