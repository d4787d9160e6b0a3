"""Vectorized evaluation of expression trees on runs of consecutive integers.

A :class:`Grid` holds the values f(sigma*x + c) for x = 0..length-1 as a
group-ring vector of residue arrays: the value at x is
``p**e * sum_r rows[r][x] * zeta**r`` (zeta of order D = p^n) with every
residue known mod ``p**K``. Reduction modulo the cyclotomic polynomial is
postponed until the arrays have been summed down to scalars.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels as kn
from .cyclotomic import Character, CycloElement, CycloRing
from .functions import (
    Char, Const, ExpT, Identity, LogQ, Node, Periodic, Power, Product, QBracket, QExpT,
    Reflect, Scale, Shift, Sum, char_level, exp_int,
)
from .padic import PadicScalar, QConfig, q_power, vp, vp_rational


@dataclass
class Grid:
    ring: CycloRing
    length: int
    e: int
    K: int
    rows: dict = field(default_factory=dict)

    @property
    def A(self) -> int:
        return self.e + self.K

    @property
    def m(self) -> int:
        return self.ring.p ** max(self.K, 0)

    def retarget(self, e: int, K: int) -> "Grid":
        """Same values with offset e <= self.e and modulus p**K, K <= self.A - e."""
        if e > self.e or e + K > self.A:
            raise ValueError("retarget cannot gain precision")
        if K <= 0:
            return Grid(self.ring, self.length, e, 0, {})
        m = self.ring.p**K
        factor = self.ring.p ** (self.e - e)
        rows = {}
        for r, arr in self.rows.items():
            arr = kn.reduce(arr, m)
            if factor != 1:
                arr = kn.scalmod(arr, factor, m)
            rows[r] = arr
        return Grid(self.ring, self.length, e, K, rows)

    def row(self, r: int):
        arr = self.rows.get(r)
        return arr if arr is not None else kn.full(self.length, 0, self.m)

    def value_at(self, x: int) -> CycloElement:
        vec = [0] * self.ring.D
        for r, arr in self.rows.items():
            vec[r] = int(arr[x])
        return self.ring.from_group(vec, self.e, self.A)

    def slice(self, start: int, stop: int) -> "Grid":
        rows = {r: arr[start:stop] for r, arr in self.rows.items()}
        return Grid(self.ring, stop - start, self.e, self.K, rows)


def _zero_grid(ring, length, A):
    return Grid(ring, length, A, 0, {})


def add(a: Grid, b: Grid) -> Grid:
    e = min(a.e, b.e)
    A = min(a.A, b.A)
    K = A - e
    if K <= 0:
        return _zero_grid(a.ring, a.length, A)
    a2, b2 = a.retarget(e, K), b.retarget(e, K)
    m = a2.m
    rows = dict(a2.rows)
    for r, arr in b2.rows.items():
        rows[r] = kn.addmod(rows[r], arr, m) if r in rows else arr
    return Grid(a.ring, a.length, e, K, rows)


def mul(a: Grid, b: Grid) -> Grid:
    e = a.e + b.e
    K = min(a.K, b.K)
    if K <= 0:
        return _zero_grid(a.ring, a.length, e + K)
    a2, b2 = a.retarget(a.e, K), b.retarget(b.e, K)
    m, D = a2.m, a.ring.D
    rows = {}
    for r1, x in a2.rows.items():
        for r2, y in b2.rows.items():
            prod = kn.mulmod(x, y, m)
            r = (r1 + r2) % D
            rows[r] = kn.addmod(rows[r], prod, m) if r in rows else prod
    return Grid(a.ring, a.length, e, K, rows)


def scale_rational(a: Grid, c: Fraction) -> Grid:
    if c == 0:
        return _zero_grid(a.ring, a.length, a.A)
    p = a.ring.p
    v = vp_rational(c, p)
    unit = Fraction(c) / Fraction(p) ** v
    m = a.m
    u = unit.numerator * pow(unit.denominator, -1, m) % m
    rows = {r: kn.scalmod(arr, u, m) for r, arr in a.rows.items()}
    return Grid(a.ring, a.length, a.e + v, a.K, rows)


def constant(ring: CycloRing, length: int, value: CycloElement) -> Grid:
    value = ring.embed(value)
    m = ring.p ** max(value.K, 0)
    rows = {i: kn.full(length, c, m) for i, c in enumerate(value.coeffs) if c}
    return Grid(ring, length, value.e, value.K, rows)


def _power_grid(g: Grid, k: int, ring, length, prec) -> Grid:
    result = None
    base = g
    while k:
        if k & 1:
            result = base if result is None else mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    if result is None:
        return constant(ring, length, ring.one(prec))
    return result


class GridEvaluator:
    """Evaluate trees at X = sigma*x + c for x in range(length)."""

    def __init__(self, ring: CycloRing, q: QConfig, prec: int = None):
        self.ring = ring
        self.q = q
        self.p = ring.p
        self.prec = ring.ctx.M if prec is None else prec

    def _args(self, length, sigma, c):
        return sigma * np.arange(length, dtype=np.int64) + np.int64(c)

    def _geometric(self, base: int, length: int, sigma: int, c: int, m: int):
        """base**(sigma*x + c) mod m for a unit base."""
        step = pow(base, sigma, m)
        arr = kn.geometric(step, length, m)
        start = pow(base, c, m)
        return arr if start == 1 else kn.scalmod(arr, start, m)

    def __call__(self, f: Node, length: int, sigma: int = 1, c: int = 0) -> Grid:
        if char_level(f) > self.ring.n:
            raise ValueError(f"character level {char_level(f)} exceeds ring level {self.ring.n}")
        return self._eval(f, length, sigma, c)

    def _eval(self, f: Node, length: int, sigma: int, c: int) -> Grid:
        ring, p, prec = self.ring, self.p, self.prec
        if isinstance(f, Const):
            v = f.value
            if isinstance(v, Fraction):
                if v == 0:
                    return _zero_grid(ring, length, prec)
                s = PadicScalar.from_rational(v, p, prec - vp_rational(v, p))
                return constant(ring, length, ring.scalar(s))
            return constant(ring, length, ring.scalar(v) if isinstance(v, PadicScalar) else v)
        if isinstance(f, LogQ):
            return constant(ring, length, ring.scalar(self.q.log_at(prec)))
        if isinstance(f, Identity):
            m = p**prec
            return Grid(ring, length, 0, prec, {0: kn.from_ints(self._args(length, sigma, c), m)})
        if isinstance(f, Power):
            return _power_grid(self._eval(f.base, length, sigma, c), f.k, ring, length, prec)
        if isinstance(f, ExpT):
            m = p**prec
            base = exp_int(f.t, p, prec)
            return Grid(ring, length, 0, prec, {0: self._geometric(base, length, sigma, c, m)})
        if isinstance(f, QExpT):
            m = p**prec
            if f.t.denominator == 1:
                base = self.q.power_int(int(f.t), prec)
            else:
                base = q_power(self.q, f.t, prec).residue()
            return Grid(ring, length, 0, prec, {0: self._geometric(base, length, sigma, c, m)})
        if isinstance(f, QBracket):
            if self.q.is_one:
                return self._eval(Identity(), length, sigma, c)
            return self._bracket(length, sigma, c)
        if isinstance(f, Char):
            s = Character(f.level, f.k, p).exponent_in(ring)
            idx = np.mod(s * self._args(length, sigma, c), ring.D)
            m = p**prec
            rows = {}
            for r in np.unique(idx).tolist():
                rows[int(r)] = kn.from_ints((idx == r).astype(np.int64), m)
            return Grid(ring, length, 0, prec, rows)
        if isinstance(f, Periodic):
            return self._periodic(f, length, sigma, c)
        if isinstance(f, Sum):
            acc = self._eval(f.terms[0], length, sigma, c)
            for t in f.terms[1:]:
                acc = add(acc, self._eval(t, length, sigma, c))
            return acc
        if isinstance(f, Product):
            acc = self._eval(f.factors[0], length, sigma, c)
            for t in f.factors[1:]:
                acc = mul(acc, self._eval(t, length, sigma, c))
            return acc
        if isinstance(f, Scale):
            return scale_rational(self._eval(f.f, length, sigma, c), f.c)
        if isinstance(f, Shift):
            return self._eval(f.f, length, sigma, c + f.a)
        if isinstance(f, Reflect):
            return self._eval(f.f, length, -sigma, f.z - c)
        raise TypeError(f"unknown node {type(f).__name__}")

    def _bracket(self, length, sigma, c) -> Grid:
        # [X] = (q^X - 1)/(q - 1): work mod p^(prec + v(q-1)), then divide exactly
        p, prec, vq = self.p, self.prec, self.q.vq
        big = p ** (prec + vq)
        m = p**prec
        Q = self.q.q_int(prec + vq)
        powers = self._geometric(Q, length, sigma, c, big)
        num = kn.submod(powers, kn.full(length, 1, big), big)
        num = num // (np.uint64(p**vq) if num.dtype != object else p**vq)
        r = self.q.q_minus_1 / Fraction(p) ** vq
        unit_inv = r.denominator * pow(r.numerator, -1, m) % m
        return Grid(self.ring, length, 0, prec, {0: kn.scalmod(kn.reduce(num, m), unit_inv, m)})

    def _periodic(self, f: Periodic, length, sigma, c) -> Grid:
        ring = self.ring
        vals = [ring.embed(v) for v in f.values]
        e = min(v.e for v in vals)
        A = min(v.A for v in vals)
        K = A - e
        if K <= 0:
            return _zero_grid(ring, length, A)
        m = ring.p**K
        idx = np.mod(self._args(length, sigma, c), len(vals))
        rows = {}
        for j in range(ring.d):
            table = [v.coeffs[j] * ring.p ** (v.e - e) % m for v in vals]
            if any(table):
                rows[j] = kn.from_ints(np.array(table, dtype=object)[idx], m)
        return Grid(ring, length, e, K, rows)


def evaluate(f: Node, length: int, ring: CycloRing, q: QConfig, prec: int = None,
             sigma: int = 1, c: int = 0) -> Grid:
    return GridEvaluator(ring, q, prec)(f, length, sigma, c)


# -- reductions ---------------------------------------------------------------

def element_from_sums(ring: CycloRing, e: int, K: int, sums: dict) -> CycloElement:
    vec = [0] * ring.D
    for r, s in sums.items():
        vec[r] = s
    return ring.from_group(vec, e, e + max(K, 0))


def weighted_total(g: Grid, base: int = 1, start: int = 1) -> CycloElement:
    """sum_x g(x) * start * base**x as a ring element."""
    m = g.m
    if g.K <= 0:
        return g.ring.element([0], g.A, g.A)
    if base % m == 1 and start % m == 1:
        sums = {r: kn.summod(arr, m) for r, arr in g.rows.items()}
    else:
        sums = {r: kn.weighted_sum(arr, base, m, start) for r, arr in g.rows.items()}
    return element_from_sums(g.ring, g.e, g.K, sums)


def dot(a: Grid, b: Grid) -> CycloElement:
    """sum_x a(x) b(x)."""
    e = a.e + b.e
    K = min(a.K, b.K)
    ring = a.ring
    if K <= 0:
        return ring.element([0], e + K, e + K)
    a2, b2 = a.retarget(a.e, K), b.retarget(b.e, K)
    m, D = a2.m, ring.D
    vec = [0] * D
    for r1, x in a2.rows.items():
        for r2, y in b2.rows.items():
            vec[(r1 + r2) % D] += kn.dotmod(x, y, m)
    return ring.from_group(vec, e, e + K)


def residue_class_sums(g: Grid, period: int, base: int = 1) -> dict:
    """For each row r and class c mod period: sum_{x = c mod period} g_r(x) base**x mod p^K."""
    m = g.m
    out = {}
    for r, arr in g.rows.items():
        sums = []
        step = pow(base, period, m)
        for cl in range(period):
            sub = arr[cl::period]
            if base % m == 1:
                sums.append(kn.summod(sub, m))
            else:
                sums.append(kn.weighted_sum(sub, step, m, pow(base, cl, m)))
        out[r] = sums
    return out


def cumsum(g: Grid) -> Grid:
    rows = {r: kn.cumsum_mod(arr, g.m) for r, arr in g.rows.items()}
    return Grid(g.ring, g.length, g.e, g.K, rows)


def cross(f: Grid, g: Grid, cyclic: bool) -> list:
    """Full table z -> sum_x f(x) g(z - x) for z < len(f) using the cross-sum kernel.

    Cyclic: g has the same length P as f and is indexed mod P. Linear: g has
    length 2P-1 and g.rows[r][j] is the value at j - (P-1).
    """
    ring = f.ring
    e = f.e + g.e
    K = min(f.K, g.K)
    P = f.length
    if K <= 0:
        return [ring.element([0], e + K, e + K)] * P
    f2, g2 = f.retarget(f.e, K), g.retarget(g.e, K)
    m, D = f2.m, ring.D
    acc = {}
    for r1, x in f2.rows.items():
        for r2, y in g2.rows.items():
            r = (r1 + r2) % D
            tab = kn.cross_sum(x, y, m, cyclic)
            acc[r] = kn.addmod(acc[r], tab, m) if r in acc else tab
    out = []
    for z in range(P):
        out.append(element_from_sums(ring, e, K, {r: int(t[z]) for r, t in acc.items()}))
    return out


__all__ = [
    "Grid", "GridEvaluator", "add", "constant", "cross", "cumsum", "dot", "element_from_sums",
    "evaluate", "mul", "residue_class_sums", "scale_rational", "weighted_total",
]
