"""Acceptance criteria 1-11. Each test prints one PASS/FAIL line (collected in the summary)."""
import io
import time
from fractions import Fraction

from conftest import record_criterion

from qvolk.cli import run_command
from qvolk.cyclotomic import Character
from qvolk.fourier import (
    IDENTITIES, conv_table, inverse_finite, iq_transform, verify_identity,
)
from qvolk.functions import eval_fn, parse_fn, random_function
from qvolk.integral import (
    IntegralConfig, bernoulli_exact, iq_limit, laplace_closed_form, riemann_sum, scalar_limit_valuation,
    shift_identity_exact, shift_identity_residual,
)
from qvolk.padic import INF, PadicScalar, QConfig, vp
from qvolk.integral import bracket_scalar


def fn(src, p=3, n=2):
    return parse_fn(src, p=p, n=n)


def residual_digits(x):
    """Valuation of a residual; a residual vanishing at precision A counts as A."""
    return x.valuation_or_cap()[0]


def test_criterion_01_mass_normalization():
    t0 = time.perf_counter()
    bad = []
    for p in (3, 5, 7):
        for q in (0, p, p * p):
            cfg = IntegralConfig.create(p, 12, q, 1)
            for N in range(1, 9):
                if riemann_sum(fn("1", p), cfg.at_level(N)) != 1:
                    bad.append((p, q, N))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1.0
    record_criterion(1, ok, f"riemann_sum(1) == 1 for N<=8, 3 q's, p in 3,5,7; failures={bad}; {elapsed:.2f}s (< 1 s)")
    assert ok


def test_criterion_02_bernoulli_moments():
    worst, times = {}, {}
    for p, N in ((3, 10), (5, 7), (7, 6)):
        cfg = IntegralConfig.create(p, N + 10, 0, N)
        t0 = time.perf_counter()
        digits = []
        for m in range(11):
            res = iq_limit(fn(f"x^{m}" if m else "1", p), cfg)
            digits.append(residual_digits(res.value - bernoulli_exact(m)))
        times[p] = time.perf_counter() - t0
        worst[p] = min(digits)
    ok = all(v >= 5 for v in worst.values()) and all(t < 60 for t in times.values())
    detail = ", ".join(f"p={p}: min agreement {worst[p]} digits in {times[p]:.1f}s" for p in worst)
    record_criterion(2, ok, f"B_0..B_10 to >= 5 digits; {detail}")
    assert ok


def test_criterion_03_shift_identity():
    lines, ok = [], True
    for p, N in ((3, 10), (5, 7), (7, 6)):
        cfg = IntegralConfig.create(p, N + 10, p, N)
        for src in ("x", "x^2", f"exp({p})", "qbr*x"):
            v = residual_digits(shift_identity_residual(fn(src, p), cfg))
            ok &= v >= 5
            lines.append(f"{src}@p{p}:{v}")
        for src in ("1", "x"):
            exact = shift_identity_exact(fn(src, p), cfg)
            ok &= exact == 0
            lines.append(f"{src}@p{p}:exact {exact}")
    record_criterion(3, ok, "shift residual >= 5, exact 0 for 1 and x; " + " ".join(lines))
    assert ok


def test_criterion_04_finite_inversion():
    t0 = time.perf_counter()
    worst_margin, checked = None, 0
    for p in (3, 5):
        for n in (1, 2):
            M = 12
            cfg = IntegralConfig.create(p, M, p, max(n, 1), 1, n)
            P = p**n
            extra = M + 8
            scale = PadicScalar.from_rational(P, p, extra) / bracket_scalar(cfg.q, P, extra)
            for seed in range(20):
                f = random_function(seed, p, n)
                tbl = iq_transform(f, n, cfg, N=n)
                ring = tbl.ring
                for x in range(P):
                    qx = PadicScalar.from_parts(p, cfg.q.power_int(x, extra), 0, extra)
                    rhs = eval_fn(f, x, ring, cfg.q, extra) * ring.scalar(scale * qx)
                    v = residual_digits(inverse_finite(tbl, x) - rhs)
                    margin = v - (M - n)
                    worst_margin = margin if worst_margin is None else min(worst_margin, margin)
                    checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst_margin >= 0 and elapsed < 10
    record_criterion(4, ok, f"{checked} points, min(residual - (M-n)) = {worst_margin}; {elapsed:.1f}s (< 10 s)")
    assert ok


def test_criterion_05_prop1_limit():
    t0 = time.perf_counter()
    cfg = IntegralConfig.create(3, 16, 3, 8, 1, 2)
    ok, parts = True, []
    for src in ("x", "x^2", "chi(1,1)*x"):
        rep = verify_identity("prop1", fn(src), None, cfg, 4)
        seq = [r.valuation for _, r in rep.details["by_level"]]
        ok &= seq == sorted(seq) and seq[-1] >= 3
        parts.append(f"{src}: " + ",".join(str(v) for v in seq))
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record_criterion(5, ok, f"corrected residual n=1..4 non-decreasing, >= 3 at n=4; {'; '.join(parts)}; {elapsed:.1f}s")
    assert ok


def test_criterion_06_scalar_limit():
    q = QConfig(IntegralConfig.create(3, 16, 3, 8).ctx, 3)
    vals = [scalar_limit_valuation(n, q) for n in range(1, 7)]
    seq = [v for v, _ in vals]
    ok = all(e for _, e in vals) and all(b - a >= 1 for a, b in zip(seq, seq[1:]))
    record_criterion(6, ok, f"v(p^n/[p^n] - A) for n=1..6: {[str(v) for v in seq]}")
    assert ok


def test_criterion_07_closed_form():
    ok, parts = True, []
    for p, N in ((3, 8), (5, 6)):
        cfg = IntegralConfig.create(p, 20, p, N, 1, 1)
        for t in (p, 2 * p):
            for k in (0, 1):
                f = fn(f"exp({t})*chi({k},1)", p, 1)
                rep = verify_identity("closed_form", f, None, cfg, 1)
                cor = rep.corrected.valuation
                ratio = rep.details["ratio_vs_A"].valuation
                lit = rep.literal.valuation
                ok &= cor >= 4 and ratio >= 4
                parts.append(f"p{p} t={t} xi=z^{k}: corrected {cor}, literal {lit}, ratio-vs-A {ratio}")
    record_criterion(7, ok, "normalized form >= 4 digits, literal off by (q-1)/log q to >= 4 digits; " + "; ".join(parts))
    assert ok


def test_criterion_08_multiplicativity():
    cfg1 = IntegralConfig.create(3, 16, 0, 4, 1, 1)
    exact_zero = 0
    for seed in range(10):
        f, g = random_function(2 * seed, 3, 1), random_function(2 * seed + 1, 3, 1)
        rep = verify_identity("mult", f, g, cfg1, 1)
        exact_zero += (not rep.corrected.exact) and (not rep.literal.exact)
    cfgq = IntegralConfig.create(3, 16, 3, 8, 1, 2)
    ratios = []
    for f, g in (("x", "x^2"), ("chi(1)*x", "exp(3)"), ("x^3 + 1", "qbr")):
        rep = verify_identity("mult", fn(f), fn(g), cfgq, 2)
        ratios.append(rep.details["ratio_vs_A"].valuation)
    ok = exact_zero == 10 and min(ratios) >= 4
    record_criterion(8, ok, f"q=1: {exact_zero}/10 pairs vanish at working precision; "
                            f"q=1+3: ratio vs (q-1)/log q agrees to {[str(r) for r in ratios]} digits (>= 4)")
    assert ok


def test_criterion_09_theorem2():
    cfg = IntegralConfig.create(3, 16, 3, 8, 1, 2)
    pairs = (("x", "x"), ("x", "x^2"), ("chi(1)", "x"))
    lit = {}
    for f, g in pairs:
        lit[(f, g)] = verify_identity("thm2", fn(f), fn(g), cfg, 2).literal.valuation
    growth = {}
    for f, g in pairs:
        growth[(f, g)] = [verify_identity("thm2", fn(f), fn(g), cfg.with_q(3**k).at_level(4), 2).literal.valuation
                          for k in (1, 2, 3)]
    linear_g = [pair for pair in pairs if pair[1] == "x"]
    grows = all(all(b > a for a, b in zip(growth[pr], growth[pr][1:])) for pr in linear_g)
    ok = all(v >= 4 for v in lit.values()) and grows
    detail = "; ".join(f"({f},{g}) {lit[(f, g)]} k-seq {[str(v) for v in growth[(f, g)]]}" for f, g in pairs)
    record_criterion(9, ok, f"literal residual >= 4 at N=8; growth in k at N=4 (linear g); {detail}")
    assert ok


def test_criterion_10_theorem3():
    cfg = IntegralConfig.create(3, 16, 3, 8, 1, 2)
    parts, ok = [], True
    for f, g in (("x", "x"), ("x", "x^2"), ("chi(1)", "x")):
        rep = verify_identity("thm3", fn(f), fn(g), cfg, 2)
        ok &= rep.corrected.valuation >= 3
        parts.append(f"({f},{g}) corrected {rep.corrected.valuation}, literal {rep.literal.valuation}")
    record_criterion(10, ok, "corrected residual >= 3; " + "; ".join(parts))
    assert ok


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, out, err)
    return code, out.getvalue()


def _consistent(low, high):
    """high (M+4) truncated to low's precision reproduces low (M)."""
    return high.A >= low.A and high.truncate(low.A) == low


def _residual_consistent(low, high):
    if low.exact:
        return high.exact and high.valuation == low.valuation
    return high.valuation >= low.valuation


def test_criterion_11_determinism_and_precision():
    argv = ["verify", "--q", "3/1", "--f", "x", "--g", "x^2"]
    first, second = _cli(argv), _cli(argv)
    deterministic = first == second and first[0] == 0

    M = 16
    lo = IntegralConfig.create(3, M, 3, 6, 1, 2)
    hi = lo.with_precision(M + 4)
    f, g = fn("x^2 + chi(1)*x"), fn("exp(3)*x")
    bad = []
    if not _consistent(iq_limit(f, lo).value, iq_limit(f, hi).value):
        bad.append("integrate")
    for m in range(6):
        b_lo = iq_limit(fn(f"x^{m}"), lo.with_q(0)).value
        b_hi = iq_limit(fn(f"x^{m}"), hi.with_q(0)).value
        if not _consistent(b_lo, b_hi):
            bad.append(f"bernoulli {m}")
    for twist in (False, True):
        t_lo, t_hi = iq_transform(f, 2, lo, twist), iq_transform(f, 2, hi, twist)
        if not all(_consistent(a, b) for a, b in zip(t_lo.entries, t_hi.entries)):
            bad.append(f"transform twist={twist}")
    if not all(_consistent(a, b) for a, b in zip(conv_table(f, g, lo.at_level(2)), conv_table(f, g, hi.at_level(2)))):
        bad.append("convolution table")
    for ident in IDENTITIES:
        ff = fn("exp(3)*chi(1,1)") if ident == "closed_form" else f
        r_lo = verify_identity(ident, ff, g, lo, 2)
        r_hi = verify_identity(ident, ff, g, hi, 2)
        if not (_residual_consistent(r_lo.literal, r_hi.literal)
                and _residual_consistent(r_lo.corrected, r_hi.corrected)):
            bad.append(ident)
    ok = deterministic and not bad
    record_criterion(11, ok, f"verify twice byte-identical: {deterministic}; M={M} vs M+4 mismatches: {bad or 'none'}")
    assert ok
