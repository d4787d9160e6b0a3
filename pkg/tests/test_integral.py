from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from qvolk.cyclotomic import Character, make_ring
from qvolk.functions import Char, ExpT, Identity, parse_fn, random_function
from qvolk.integral import (
    IntegralConfig, bernoulli_exact, i0_limit, iq_limit, laplace_closed_form, measure_ball, riemann_sum,
    riemann_sum_reference, scalar_limit_valuation, shift_identity_exact, shift_identity_residual,
    stabilization,
)
from qvolk.padic import INF, PadicScalar, PrecisionError, PrimeContext, QConfig, vp


def cfg_for(p=3, M=16, q=0, N=4, l=1, n=0):
    return IntegralConfig.create(p, M, q, N, l, n)


def agrees(value, exact: Fraction, digits):
    """value - exact has valuation >= digits (or vanishes at value's precision)."""
    d = value - exact
    v, is_exact = d.valuation_or_cap()
    return (not is_exact and v >= digits) or v >= digits


# -- measure ------------------------------------------------------------------------

def test_measure_ball_examples():
    cfg = cfg_for(N=1)
    assert measure_ball(0, cfg) == PadicScalar.from_rational(Fraction(1, 3), 3, 16)
    with pytest.raises(ValueError):
        measure_ball(3, cfg)


@pytest.mark.parametrize("q", [0, 3, Fraction(9, 2)])
@pytest.mark.parametrize("l", [1, 2])
def test_total_mass(q, l):
    cfg = cfg_for(q=q, N=3, l=l)
    total = sum((measure_ball(a, cfg) for a in range(1, cfg.L)), measure_ball(0, cfg))
    assert total == 1


@settings(max_examples=30, deadline=None)
@given(N=st.integers(1, 3), q=st.sampled_from([0, 3, 6, Fraction(3, 2)]), data=st.data())
def test_distribution_relation(N, q, data):
    cfg = cfg_for(q=q, N=N, M=20)
    a = data.draw(st.integers(0, cfg.L - 1))
    fine = cfg.at_level(N + 1)
    parts = [measure_ball(a + i * 3**N, fine) for i in range(3)]
    total = parts[0] + parts[1] + parts[2]
    coarse = measure_ball(a, cfg)
    A = min(total.A, coarse.A)
    assert total.truncate(A) == coarse.truncate(A)


# -- Riemann sums -------------------------------------------------------------------

@pytest.mark.parametrize("q", [0, 3, Fraction(3, 4)])
def test_riemann_sum_of_one(q):
    for N in (1, 3, 5):
        assert riemann_sum(parse_fn("1"), cfg_for(q=q, N=N)) == 1


def test_riemann_sum_examples():
    for N in (1, 2, 4):
        assert riemann_sum(Identity(), cfg_for(N=N)) == Fraction(3**N - 1, 2)
    q = Fraction(4)
    expect = (q + 2 * q * q) / (1 + q + q * q)
    assert riemann_sum(Identity(), cfg_for(q=3, N=1)) == expect


def test_riemann_sum_precision_exhausted():
    cfg = cfg_for(M=6, N=5)
    with pytest.raises(PrecisionError):
        riemann_sum(Identity(), cfg, prec=4)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), q=st.sampled_from([0, 3, 9]), l=st.sampled_from([1, 2]))
def test_grid_sum_matches_reference(seed, q, l):
    cfg = cfg_for(q=q, N=2, l=l, n=1, M=14)
    f = random_function(seed, 3, 1)
    a, b = riemann_sum(f, cfg), riemann_sum_reference(f, cfg)
    A = min(a.A, b.A)
    assert a.truncate(A) == b.truncate(A)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), chunk=st.integers(1, 40), workers=st.sampled_from([None, 1, 3]))
def test_partitioned_sums_are_identical(seed, chunk, workers):
    cfg = cfg_for(q=3, N=4, n=1)
    f = random_function(seed, 3, 1)
    assert riemann_sum(f, cfg, chunk=chunk, workers=workers) == riemann_sum(f, cfg)


def test_character_integral_is_a_geometric_sum():
    cfg = cfg_for(q=3, N=3, n=2, M=20)
    ring = cfg.ring
    q = ring.scalar(4)
    for k in (1, 2, 4, 5):
        xi = Character(2, k, 3).value(ring)
        expect = (1 - q) * (1 - xi * q).inverse()
        got = riemann_sum(Char(k, 2), cfg)
        A = min(got.A, expect.A)
        assert got.truncate(A) == expect.truncate(A)


# -- limits -------------------------------------------------------------------------

def test_iq_limit_examples():
    res = iq_limit(Identity(), cfg_for(N=10, M=20))
    assert agrees(res.value, Fraction(-1, 2), 10)
    assert res.stable_digits >= 8 and res.converging
    res2 = iq_limit(parse_fn("x^2"), cfg_for(N=10, M=20))
    assert agrees(res2.value, Fraction(1, 6), 8)
    res1 = iq_limit(parse_fn("1"), cfg_for(N=6, q=3))
    assert res1.value == 1 and res1.stable_digits == INF


def test_iq_limit_needs_two_levels():
    with pytest.raises(ValueError):
        iq_limit(Identity(), cfg_for(N=3), N_max=1)


def test_stabilization_reports_decrease():
    R = make_ring(PrimeContext(3, 10), 0)
    vals = [R.scalar(9), R.scalar(9 + 3**6), R.scalar(9 + 3**6 + 3)]
    stable, converging, diffs = stabilization(list(enumerate(vals)))
    assert [v for v, _ in diffs] == [6, 1] and not converging and stable == 1


@pytest.mark.parametrize("src", ["x", "x^3 + x", "exp(3)", "exp(3)*chi(1)", "qbr"])
def test_stabilization_is_monotone(src):
    res = iq_limit(parse_fn(src, p=3, n=1), cfg_for(q=3, N=7, n=1, M=18))
    assert res.converging
    exact = [v for v, e in res.diffs if e]
    assert exact == sorted(exact)


@pytest.mark.parametrize("p,N", [(3, 10), (5, 7)])
def test_bernoulli_moments(p, N):
    cfg = cfg_for(p=p, N=N, M=N + 10)
    for m in range(0, 11):
        f = parse_fn(f"x^{m}" if m else "1", p=p)
        res = i0_limit(f, cfg)
        assert agrees(res.value, bernoulli_exact(m), 5)


def test_bernoulli_exact_examples():
    assert bernoulli_exact(0) == 1
    assert bernoulli_exact(1) == Fraction(-1, 2)
    assert bernoulli_exact(12) == Fraction(-691, 2730)
    for m in range(2, 31):
        assert bernoulli_exact(m) == Fraction(str(sympy.bernoulli(m)))


# -- shift identity -----------------------------------------------------------------

def test_shift_identity_examples():
    cfg = cfg_for(N=4)
    assert shift_identity_residual(parse_fn("5"), cfg).is_zero()
    assert shift_identity_residual(Identity(), cfg).is_zero()
    assert shift_identity_exact(Identity(), cfg) == 0
    assert shift_identity_exact(parse_fn("7"), cfg) == 0
    r = shift_identity_residual(ExpT(Fraction(3)), cfg_for(N=8, M=20))
    v, exact = r.valuation_or_cap()
    assert v >= 6


@pytest.mark.parametrize("src", ["x^2", "x^3 - x", "x^4"])
def test_shift_identity_exact_residual_grows(src):
    f = parse_fn(src)
    vals = [vp(shift_identity_exact(f, cfg_for(N=N, M=N + 6)).numerator, 3) for N in (2, 4, 6)]
    assert vals == sorted(vals) and vals[-1] > vals[0]


# -- closed form and scalar limit ---------------------------------------------------

def test_closed_form_examples():
    cfg = cfg_for(q=3, N=6, n=1, M=20)
    one = Character(1, 0, 3)
    literal, normalized = laplace_closed_form(Fraction(0), one, cfg)
    assert normalized == 1
    q = QConfig(cfg.ctx, 3)
    A = min(literal.A, 18)
    assert literal.truncate(A) == cfg.ring.scalar(q.log_at(24) / 3).truncate(A)
    zeta = Character(1, 1, 3)
    _, normalized = laplace_closed_form(Fraction(0), zeta, cfg)
    got = riemann_sum(Char(1, 1), cfg)
    A = min(got.A, normalized.A)
    assert got.truncate(A) == normalized.truncate(A)


def test_closed_form_errors():
    cfg = cfg_for(q=0, N=3, n=1)
    with pytest.raises(ValueError):
        laplace_closed_form(Fraction(1), Character(1, 1, 3), cfg)


@pytest.mark.parametrize("t", [3, 6])
@pytest.mark.parametrize("k", [0, 1])
def test_closed_form_matches_limit(t, k):
    cfg = cfg_for(q=3, N=9, n=1, M=20)
    f = parse_fn(f"exp({t})*chi({k})", p=3, n=1)
    res = iq_limit(f, cfg)
    _, normalized = laplace_closed_form(Fraction(t), Character(1, k, 3), cfg)
    v, _ = (res.value - normalized).valuation_or_cap()
    assert v >= 6


@pytest.mark.parametrize("q", [3, 9, Fraction(3, 2)])
def test_scalar_limit_increases(q):
    Q = QConfig(PrimeContext(3, 16), q)
    vals = [scalar_limit_valuation(n, Q) for n in range(1, 7)]
    assert all(e for _, e in vals)
    vs = [v for v, _ in vals]
    assert all(b > a for a, b in zip(vs, vs[1:]))


def test_config_validation():
    with pytest.raises(ValueError):
        cfg_for(M=8, N=8)
    with pytest.raises(ValueError):
        cfg_for(l=3)
    with pytest.raises(ValueError):
        cfg_for(N=0)
