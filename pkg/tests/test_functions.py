from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from qvolk.cyclotomic import Character, char_eval, make_ring
from qvolk.functions import (
    Char, Const, ExpT, Identity, ParseEnv, ParseError, Power, Product, QBracket, Reflect, Shift,
    derivative, derivative_at_zero, eval_fn, parse_fn, random_function, reflect, shift, to_source,
)
from qvolk.grid import evaluate
from qvolk.padic import INF, PrimeContext, QConfig, padic_log

CTX = PrimeContext(3, 20)
R1 = make_ring(CTX, 1)
R2 = make_ring(CTX, 2)
Q3 = QConfig(CTX, 3)


def test_parse_examples():
    assert parse_fn("x^2") == Power(Identity(), 2)
    f = parse_fn("chi(1)*exp(3)", p=3, n=1)
    assert f == Product((Char(1, 1), ExpT(Fraction(3))))
    assert parse_fn("qbr()") == QBracket() == parse_fn("qbr")


def test_parse_rationals_and_nesting():
    f = parse_fn("1/2*shift(x^2 + 3, -1) - reflect(chi(2, 2), 4)", p=3, n=2)
    assert eval_fn(f, 5, R2) == Fraction(1, 2) * (16 + 3) - char_eval(Character(2, 2, 3), -1, R2)


def test_parse_round_trip():
    for src in ["x^3 + 2*x", "exp(6)*chi(2)", "shift(qbr, 2) - 1/4", "reflect(x*qexp(1), 3)"]:
        f = parse_fn(src)
        g = parse_fn(to_source(f))
        assert to_source(parse_fn(to_source(g))) == to_source(g)
        for x in range(-3, 6):
            assert eval_fn(g, x, R1, Q3) == eval_fn(f, x, R1, Q3)


@pytest.mark.parametrize("src,pos", [
    ("x^", 2), ("exp(1)", 4), ("foo(x)", 0), ("(x + 1", 6), ("1/0", 1), ("", 0), ("x $ 2", 2),
])
def test_parse_errors_report_position(src, pos):
    with pytest.raises(ParseError) as info:
        parse_fn(src, p=3)
    assert info.value.position == pos


def test_exp_parameter_must_converge():
    with pytest.raises(ParseError):
        parse_fn("exp(1/3)", p=3)
    parse_fn("exp(5)", p=5)


def test_eval_examples():
    assert eval_fn(parse_fn("x^2"), 3, R1) == 9
    assert eval_fn(parse_fn("chi(1)", n=1), 4, R1) == R1.zeta(1)
    assert eval_fn(Shift(parse_fn("x^2"), 1), 2, R1) == 9


def test_eval_rejects_deep_characters():
    with pytest.raises(ValueError):
        eval_fn(Char(1, 2), 1, R1)


def test_shift_reflect_examples():
    f = parse_fn("x^2 + chi(1)", n=1)
    for x in range(6):
        assert eval_fn(shift(f, 0), x, R1) == eval_fn(f, x, R1)
        assert eval_fn(reflect(reflect(f, 5), 5), x, R1) == eval_fn(f, x, R1)
    assert eval_fn(shift(Identity(), 1), 0, R1) == 1


def test_bracket_and_qexp_values():
    f = QBracket()
    for x in range(5):
        assert eval_fn(f, x, R1, Q3) == sum(4**j for j in range(x))
    assert eval_fn(parse_fn("qexp(2)"), 3, R1, Q3) == 4**6


def test_derivative_examples():
    assert derivative_at_zero(ExpT(Fraction(3)), R1) == 3
    assert derivative_at_zero(Char(1, 1), R1).is_zero()
    d = derivative_at_zero(QBracket(), R1, Q3)
    assert d == padic_log(Q3.q) / 3
    assert derivative_at_zero(parse_fn("x^3 + 5*x"), R1) == 5


def test_derivative_through_shift_and_reflect():
    f = parse_fn("shift(x^2, 3)")
    assert derivative_at_zero(f, R1) == 6
    g = Reflect(parse_fn("x^2"), 4)
    assert derivative_at_zero(g, R1) == -8


def _diff_quotient_gap(f, m, ring, q):
    h = 3**m
    dq = (eval_fn(f, h, ring, q) - eval_fn(f, 0, ring, q)) / Fraction(h)
    d = dq - derivative_at_zero(f, ring, q)
    v, exact = d.valuation_or_cap()
    return v if exact else INF


@pytest.mark.parametrize("src", ["x^2 + x", "exp(3)", "qbr", "exp(6)*x", "qexp(1)*chi(1)", "shift(x^3, 2)"])
def test_derivative_matches_difference_quotient(src):
    ctx = PrimeContext(3, 30)
    ring, q = make_ring(ctx, 1), QConfig(ctx, 3)
    f = parse_fn(src, p=3, n=1)
    gaps = [_diff_quotient_gap(f, m, ring, q) for m in range(1, 7)]
    assert gaps[-1] >= 6
    assert all(b >= a for a, b in zip(gaps, gaps[1:]))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), m=st.integers(1, 6))
def test_difference_quotient_tends_to_derivative(seed, m):
    ctx = PrimeContext(3, 40)
    ring, q = make_ring(ctx, 1), QConfig(ctx, 3)
    f = random_function(seed, 3, 1)
    assert _diff_quotient_gap(f, m, ring, q) >= m


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), x=st.integers(0, 200), y=st.integers(0, 200))
def test_evaluation_is_a_ring_homomorphism(seed, x, y):
    f, g = random_function(seed, 3, 2), random_function(seed + 1, 3, 2)
    for t in (x, y):
        assert eval_fn(f + g, t, R2, Q3) == eval_fn(f, t, R2, Q3) + eval_fn(g, t, R2, Q3)
        assert eval_fn(f * g, t, R2, Q3) == eval_fn(f, t, R2, Q3) * eval_fn(g, t, R2, Q3)


@settings(max_examples=40, deadline=None)
@given(ks=st.lists(st.integers(0, 8), min_size=1, max_size=3), c=st.integers(-5, 5), x=st.integers(-50, 300))
def test_local_constancy(ks, c, x):
    f = Const(Fraction(c))
    for k in ks:
        f = f + Char(k, 2) * Char((k * 5) % 9, 2)
    assert eval_fn(f, x, R2) == eval_fn(f, x % 9, R2)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 10**6), sigma=st.sampled_from([1, -1]), c=st.integers(-6, 6))
def test_grid_matches_pointwise(seed, sigma, c, backend):
    f = random_function(seed, 3, 2, depth=3)
    grid = evaluate(f, 20, R2, Q3, sigma=sigma, c=c)
    for x in range(20):
        a, b = grid.value_at(x), eval_fn(f, sigma * x + c, R2, Q3)
        A = min(a.A, b.A)
        assert a.truncate(A) == b.truncate(A)


def test_grid_matches_pointwise_on_wide_moduli(backend):
    ctx = PrimeContext(3, 45)
    ring, q = make_ring(ctx, 1), QConfig(ctx, 3)
    for seed in range(10):
        f = random_function(seed, 3, 1, depth=3)
        grid = evaluate(f, 12, ring, q)
        for x in range(12):
            a, b = grid.value_at(x), eval_fn(f, x, ring, q)
            A = min(a.A, b.A)
            assert a.truncate(A) == b.truncate(A)


def test_random_function_is_reproducible():
    assert random_function(7, 5, 2) == random_function(7, 5, 2)
    assert derivative(random_function(7, 5, 2), QConfig(PrimeContext(5, 8), 5)) is not None
