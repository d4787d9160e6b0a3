"""q-measure, Riemann sums, limit integrals and their exact oracles."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .cyclotomic import Character, CycloElement, CycloRing, make_ring
from .functions import (
    Evaluator, Node, char_level, derivative, eval_fn, exp_int, rational_eval, shift,
)
from .grid import evaluate, weighted_total
from .padic import INF, PadicScalar, PrecisionError, PrimeContext, QConfig, vp


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IntegralConfig:
    ctx: PrimeContext
    q: QConfig
    N: int = 8
    l: int = 1
    ring: Optional[CycloRing] = None

    def __post_init__(self):
        p = self.ctx.p
        if self.N < 1:
            raise ValueError("level N must be >= 1")
        if self.l < 1 or (self.l > 1 and math.gcd(self.l, p) != 1):
            raise ValueError(f"l={self.l} must be a positive integer prime to p")
        if self.ctx.M <= self.N:
            raise ValueError(f"precision M={self.ctx.M} must exceed level N={self.N}")
        if self.q.ctx.p != p:
            raise ValueError("q lives over a different prime")
        if self.ring is None:
            object.__setattr__(self, "ring", make_ring(self.ctx, 0))
        elif self.ring.p != p:
            raise ValueError("ring lives over a different prime")

    @classmethod
    def create(cls, p: int = 3, M: int = 16, q_minus_1=0, N: int = 8, l: int = 1, n: int = 0):
        ctx = PrimeContext(p, M)
        return cls(ctx, QConfig(ctx, q_minus_1), N, l, make_ring(ctx, n))

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def M(self) -> int:
        return self.ctx.M

    @property
    def L(self) -> int:
        """Number of Riemann-sum points l*p^N."""
        return self.l * self.p**self.N

    def at_level(self, N: int) -> "IntegralConfig":
        return replace(self, N=N)

    def with_ring(self, n: int) -> "IntegralConfig":
        return replace(self, ring=make_ring(self.ctx, n))

    def with_q(self, q_minus_1) -> "IntegralConfig":
        return replace(self, q=QConfig(self.ctx, q_minus_1))

    def with_precision(self, M: int) -> "IntegralConfig":
        ctx = self.ctx.with_precision(M)
        return IntegralConfig(ctx, QConfig(ctx, self.q.q_minus_1), self.N, self.l, make_ring(ctx, self.ring.n))

    def ring_for(self, *fs: Node) -> CycloRing:
        """The configured ring, raised to the largest character level among fs."""
        need = max([self.ring.n] + [char_level(f) for f in fs])
        return self.ring if need == self.ring.n else make_ring(self.ctx, need)

    def A_scalar(self, extra: int = 0) -> PadicScalar:
        """(q-1)/log q with guard digits beyond M + N."""
        return self.q.A_at(self.M + self.N + 4 + extra)


def bracket_scalar(q: QConfig, L: int, rel: int) -> PadicScalar:
    """[L; q] with relative precision rel (its valuation equals v_p(L))."""
    p = q.p
    v = vp(L, p)
    return PadicScalar.from_parts(p, q.bracket_int(L, rel + v), 0, rel + v)


def measure_ball(a: int, cfg: IntegralConfig) -> PadicScalar:
    """mu_q(a + l p^N Z_p) = q^a / [l p^N]."""
    if not 0 <= a < cfg.L:
        raise ValueError(f"ball index {a} outside 0..{cfg.L - 1}")
    M = cfg.M
    qa = PadicScalar.from_parts(cfg.p, cfg.q.power_int(a, M), 0, M)
    return qa / bracket_scalar(cfg.q, cfg.L, M)


def _chunks(L: int, chunk: Optional[int]):
    if not chunk or chunk >= L:
        return [(0, L)]
    return [(s, min(s + chunk, L)) for s in range(0, L, chunk)]


def weighted_sum_fn(f: Node, L: int, ring: CycloRing, fq: QConfig, wq: Optional[QConfig],
                    prec: int, chunk: Optional[int] = None, workers: Optional[int] = None) -> CycloElement:
    """sum_{x<L} f(x) q_w^x with f evaluated using fq; wq=None means unit weights."""

    def part(bounds):
        start, stop = bounds
        g = evaluate(f, stop - start, ring, fq, prec, sigma=1, c=start)
        if wq is None or wq.is_one:
            return weighted_total(g)
        m = g.m
        Q = wq.q_int(max(g.K, 1))
        return weighted_total(g, Q, pow(Q, start, m) if m > 1 else 0)

    pieces = _chunks(L, chunk)
    if workers and workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(part, pieces))
    else:
        parts = [part(b) for b in pieces]
    total = parts[0]
    for x in parts[1:]:
        total = total + x
    return total


def divide_by_bracket(S: CycloElement, q: QConfig, L: int, power: int = 1) -> CycloElement:
    rel = max(S.K, 1) + 2
    b = bracket_scalar(q, L, rel)
    return S.div_scalar(b**power if power != 1 else b)


def riemann_sum(f: Node, cfg: IntegralConfig, *, prec: int = None, weights: Optional[QConfig] = None,
                chunk: Optional[int] = None, workers: Optional[int] = None) -> CycloElement:
    """(1/[lp^N]) sum_{x < lp^N} f(x) q^x, f evaluated with absolute precision prec (default M).

    ``weights`` overrides the q used for the measure (the function keeps cfg.q);
    ``chunk``/``workers`` split the x-range, the partial sums are added in order.
    """
    ring = cfg.ring_for(f)
    prec = cfg.M if prec is None else prec
    wq = cfg.q if weights is None else weights
    S = weighted_sum_fn(f, cfg.L, ring, cfg.q, wq, prec, chunk, workers)
    result = divide_by_bracket(S, wq, cfg.L)
    if result.is_zero() and result.A <= 0:
        raise PrecisionError(f"precision exhausted: M={prec} cannot absorb the division by [lp^{cfg.N}]")
    return result


def riemann_sum_reference(f: Node, cfg: IntegralConfig, prec: int = None) -> CycloElement:
    """Pointwise evaluation of the same sum (slow; an oracle for the grid path)."""
    ring = cfg.ring_for(f)
    prec = cfg.M if prec is None else prec
    ev = Evaluator(ring, cfg.q, prec)
    acc = ring.zero(prec)
    for x in range(cfg.L):
        w = PadicScalar.from_parts(cfg.p, cfg.q.power_int(x, prec), 0, prec)
        acc = acc + ev(f, x) * ring.scalar(w)
    return divide_by_bracket(acc, cfg.q, cfg.L)


@dataclass
class IntegralResult:
    value: CycloElement
    stable_digits: object  # Fraction, int or INF
    level: int
    precision: int
    converging: bool = True
    history: list = field(default_factory=list)
    diffs: list = field(default_factory=list)


def stabilization(history) -> tuple:
    """(stable_digits, converging, diffs) from [(level, value)] in increasing level order.

    Each diff is (valuation, exact); exact=False means the difference vanished at
    its precision. stable_digits is inf when every difference vanished, else the
    last difference's valuation.
    """
    diffs = []
    for (_, a), (_, b) in zip(history, history[1:]):
        diffs.append((b - a).valuation_or_cap())
    if not diffs:
        return Fraction(0), True, diffs
    if all(not exact for _, exact in diffs):
        return INF, True, diffs
    # a capped entry is only a lower bound, so it constrains later exact entries
    # but is never itself a decrease
    converging = True
    floor = None
    for v, exact in diffs:
        if exact and floor is not None and v < floor:
            converging = False
        floor = v if floor is None else max(floor, v)
    return diffs[-1][0], converging, diffs


def iq_limit(f: Node, cfg: IntegralConfig, N_max: int = None, N_min: int = 1, **kw) -> IntegralResult:
    """Riemann sums at N_min..N_max (default cfg.N) and their inter-level agreement."""
    N_max = cfg.N if N_max is None else N_max
    if N_max < 2:
        raise ValueError("N_max must be >= 2")
    N_min = min(N_min, N_max - 1)
    history = [(N, riemann_sum(f, cfg.at_level(N), **kw)) for N in range(N_min, N_max + 1)]
    stable, converging, diffs = stabilization(history)
    if not converging:
        warnings.warn(f"no monotone stabilization for {f}", ConvergenceWarning, stacklevel=2)
    value = history[-1][1]
    return IntegralResult(value, stable, N_max, value.A, converging, history, diffs)


def i0_limit(f: Node, cfg: IntegralConfig, N_max: int = None, **kw) -> IntegralResult:
    return iq_limit(f, cfg.with_q(0), N_max, **kw)


# -- shift identity --------------------------------------------------------------

def shift_identity_residual(f: Node, cfg: IntegralConfig) -> CycloElement:
    """I_0(f_1) - I_0(f) - f'(0) at level N (unit weights; f itself may use cfg.q)."""
    one = QConfig(cfg.ctx, 0)
    ring = cfg.ring_for(f)
    I1 = riemann_sum(shift(f, 1), cfg, weights=one)
    I0 = riemann_sum(f, cfg, weights=one)
    d0 = eval_fn(derivative(f, cfg.q), 0, ring, cfg.q, cfg.M)
    return I1 - I0 - d0


def shift_identity_exact(f: Node, cfg: IntegralConfig) -> Optional[Fraction]:
    """The same residual in exact rationals when f and f' are rational-valued, else None."""
    L = cfg.L
    a, b = rational_eval(f, L, cfg.q), rational_eval(f, 0, cfg.q)
    d = rational_eval(derivative(f, cfg.q), 0, cfg.q)
    if a is None or b is None or d is None:
        return None
    # telescoping: sum f(x+1) - sum f(x) = f(L) - f(0)
    return (a - b) / L - d


# -- oracles ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli_exact(m: int) -> Fraction:
    """B_m from sum_{k<=m} C(m+1, k) B_k = 0 with B_1 = -1/2."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return Fraction(1)
    return -sum(math.comb(m + 1, k) * bernoulli_exact(k) for k in range(m)) / (m + 1)


def laplace_closed_form(t: Fraction, xi: Character, cfg: IntegralConfig, prec: int = None) -> tuple:
    """(literal, normalized) values of int e^{tx} xi^x dmu_q.

    literal = (t + log q)/(q xi e^t - 1); normalized multiplies by (q-1)/log q.
    """
    t = Fraction(t)
    p = cfg.p
    ring = cfg.ring if cfg.ring.n >= xi.n else make_ring(cfg.ctx, xi.n)
    prec = cfg.M if prec is None else prec
    if t != 0 and vp(t.numerator, p) - vp(t.denominator, p) < 1:
        raise ValueError("t must satisfy v(t) >= 1")
    num = PadicScalar.from_rational(t, p, prec) if t else PadicScalar.zero(p, prec)
    num = num + cfg.q.log_at(prec)
    et = PadicScalar.from_parts(p, exp_int(t, p, prec) * cfg.q.q_int(prec), 0, prec)
    den = ring.scalar(et) * xi.value(ring) - 1
    if den.is_zero():
        raise ZeroDivisionError("singular denominator q*xi*e^t = 1")
    if num.is_zero():
        literal = ring.zero(num.A)
    else:
        literal = ring.scalar(num) * den.inverse()
    normalized = literal * ring.scalar(cfg.q.A_at(prec + 2))
    return literal, normalized


def scalar_limit(n: int, q: QConfig, prec: int = None) -> PadicScalar:
    """p^n / [p^n; q]."""
    p = q.p
    prec = q.ctx.M if prec is None else prec
    P = PadicScalar.from_rational(p**n, p, prec)
    return P / bracket_scalar(q, p**n, prec)


def scalar_limit_valuation(n: int, q: QConfig, prec: int = None) -> tuple:
    """(v(p^n/[p^n] - (q-1)/log q), exact) at relative precision prec (default M + n)."""
    prec = q.ctx.M + n if prec is None else prec
    diff = scalar_limit(n, q, prec) - q.A_at(prec + q.vq if not q.is_one else prec)
    if diff.is_zero():
        return Fraction(diff.A), False
    return Fraction(diff.v), True


__all__ = [
    "ConvergenceWarning", "IntegralConfig", "IntegralResult", "bernoulli_exact", "bracket_scalar",
    "divide_by_bracket", "i0_limit", "iq_limit", "laplace_closed_form", "measure_ball",
    "riemann_sum", "riemann_sum_reference", "scalar_limit", "scalar_limit_valuation",
    "shift_identity_exact", "shift_identity_residual", "stabilization",
]
