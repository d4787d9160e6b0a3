"""Command-line front end: ``qvolk {bernoulli,integrate,transform,verify}``.

Exit codes: 0 success, 2 configuration error, 3 a verification residual
fell below ``--min-digits``.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cyclotomic import make_ring
from .fourier import IDENTITIES, closed_form_parts, inverse_finite, iq_transform, verify_identity
from .functions import ParseEnv, ParseError, parse_fn, random_function, to_source
from .integral import IntegralConfig, bernoulli_exact, iq_limit
from .padic import PadicScalar, PrecisionError, PrimeContext, QConfig, is_prime
from .report import element_record, emit, fmt_number, integral_record, spectral_record, verification_record

EXIT_OK, EXIT_CONFIG, EXIT_RESIDUAL = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    p: int = 3
    M: int = 16
    q_minus_1: Fraction = Fraction(0)
    l: int = 1
    N: int = 8
    n: int = 2
    f: Optional[str] = None
    g: Optional[str] = None
    fmt: str = "json"
    seed: int = 0

    def validate(self):
        if not is_prime(self.p) or self.p < 3:
            raise ConfigError(f"p={self.p} must be an odd prime")
        if self.M < 4:
            raise ConfigError(f"precision M={self.M} must be at least 4")
        if self.N < 1 or self.n < 0:
            raise ConfigError("levels must satisfy N >= 1 and n >= 0")
        try:
            QConfig(PrimeContext(self.p, self.M), self.q_minus_1)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def integral_config(self, N: int = None, n: int = None) -> IntegralConfig:
        ctx = PrimeContext(self.p, self.M)
        try:
            return IntegralConfig(ctx, QConfig(ctx, self.q_minus_1), self.N if N is None else N,
                                  self.l, make_ring(ctx, self.n if n is None else n))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def function(self, src: Optional[str], salt: int = 0):
        if src is None:
            return random_function(self.seed + salt, self.p, max(self.n, 1))
        return parse_fn(src, ParseEnv(self.p, self.n))


def _q_spec(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"q-spec {text!r} is not a rational (value of q-1, e.g. 3/1)")


def _levels(text: str):
    try:
        a, b = text.split("..")
        a, b = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels {text!r} must look like A..B")
    if not 1 <= a <= b:
        raise argparse.ArgumentTypeError("levels need 1 <= A <= B")
    return a, b


def default_precision() -> int:
    env = os.environ.get("QVOLK_PRECISION")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return 16


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=3)
    common.add_argument("--M", type=int, default=default_precision(), help="absolute precision (digits)")
    common.add_argument("--q", type=_q_spec, default=Fraction(0), help="q-1 as a rational, e.g. 3/1")
    common.add_argument("--l", type=int, default=1)
    common.add_argument("--N", type=int, default=8, help="integral level")
    common.add_argument("--n", type=int, default=2, help="character level")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", dest="fmt", choices=["json", "csv", "text"], default="json")

    parser = argparse.ArgumentParser(prog="qvolk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bernoulli", parents=[common], help="Volkenborn moments vs exact B_m")
    b.add_argument("--max-m", type=int, default=10)

    i = sub.add_parser("integrate", parents=[common], help="Riemann sums over a range of levels")
    i.add_argument("--f")
    i.add_argument("--levels", type=_levels)

    t = sub.add_parser("transform", parents=[common], help="spectral table of f")
    t.add_argument("--f")
    t.add_argument("--twist", action="store_true")
    t.add_argument("--invert-at", type=int)

    v = sub.add_parser("verify", parents=[common], help="residuals of the identities")
    v.add_argument("--suite", default=",".join(IDENTITIES))
    v.add_argument("--f")
    v.add_argument("--g")
    v.add_argument("--min-digits", type=Fraction)
    return parser


def _run_bernoulli(args, rc: RunConfig):
    cfg = rc.integral_config()
    one = cfg.with_q(0)
    records = []
    for m in range(args.max_m + 1):
        f = parse_fn(f"x^{m}" if m else "1", ParseEnv(rc.p, rc.n))
        res = iq_limit(f, one)
        exact = bernoulli_exact(m)
        agree, is_exact = (res.value - exact).valuation_or_cap()
        records.append({
            "m": m,
            "exact": f"{exact.numerator}/{exact.denominator}" if exact.denominator != 1 else str(exact.numerator),
            "computed": element_record(res.value)["value_digits"],
            "agree_digits": fmt_number(agree),
        })
    return records, ["m", "exact", "computed", "agree_digits"], EXIT_OK


def _run_integrate(args, rc: RunConfig):
    f = rc.function(args.f)
    lo, hi = args.levels or (1, rc.N)
    if hi < 2:
        lo, hi = 1, 2
    cfg = rc.integral_config(N=hi, n=max(rc.n, 0))
    res = iq_limit(f, cfg, N_max=hi, N_min=lo)
    rec = integral_record(res)
    rec["f"] = to_source(f)
    return [rec], None, EXIT_OK


def _run_transform(args, rc: RunConfig):
    f = rc.function(args.f)
    N = rc.n if args.invert_at is not None else rc.N
    cfg = rc.integral_config(N=max(N, 1), n=rc.n)
    tbl = iq_transform(f, rc.n, cfg, twist=args.twist, N=N)
    rec = spectral_record(tbl)
    if args.invert_at is not None:
        rec["inverse_at"] = args.invert_at
        rec["inverse"] = element_record(inverse_finite(tbl, args.invert_at))
    return [rec], None, EXIT_OK


def _run_verify(args, rc: RunConfig):
    suite = [s.strip() for s in args.suite.split(",") if s.strip()]
    unknown = [s for s in suite if s not in IDENTITIES]
    if unknown:
        raise ConfigError(f"unknown identities: {', '.join(unknown)}")
    f = rc.function(args.f)
    g = rc.function(args.g, salt=1)
    cfg = rc.integral_config()
    records, code = [], EXIT_OK
    for ident in suite:
        fi = f
        if ident == "closed_form":
            try:
                closed_form_parts(f, rc.p)
            except ValueError:
                # the closed form only covers exp(t)*chi(k); use the smallest such f
                fi = parse_fn(f"exp({rc.p})*chi(1,1)", ParseEnv(rc.p, rc.n))
        rep = verify_identity(ident, fi, g, cfg, rc.n)
        records.append(verification_record(rep))
        if args.min_digits is not None and rep.corrected.valuation < args.min_digits:
            code = EXIT_RESIDUAL
    return records, None, code


COMMANDS = {
    "bernoulli": _run_bernoulli,
    "integrate": _run_integrate,
    "transform": _run_transform,
    "verify": _run_verify,
}


def run_command(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    rc = RunConfig(args.p, args.M, args.q, args.l, args.N, args.n,
                   getattr(args, "f", None), getattr(args, "g", None), args.fmt, args.seed)
    try:
        rc.validate()
        records, columns, code = COMMANDS[args.command](args, rc)
    except ParseError as exc:
        err.write(f"qvolk: parse error: {exc}\n")
        return EXIT_CONFIG
    except (ValueError, PrecisionError) as exc:
        err.write(f"qvolk: configuration error: {exc}\n")
        return EXIT_CONFIG
    out.write(emit(records, rc.fmt, columns))
    return code


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
