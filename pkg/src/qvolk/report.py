"""Deterministic JSON / CSV / text rendering of results."""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from .cyclotomic import CycloElement
from .padic import INF, PadicScalar, format_digits


def fmt_number(v):
    """Valuations: ints stay ints, other rationals become "a/b", infinity becomes "inf"."""
    if v == INF:
        return "inf"
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _int_digits(n: int, p: int, count: int) -> list:
    out = []
    for _ in range(count):
        n, d = divmod(n, p)
        out.append(d)
    while out and out[-1] == 0:
        out.pop()
    return out


def scalar_record(x: PadicScalar) -> dict:
    return {
        "value_digits": x.digits(),
        "valuation": fmt_number(x.v),
        "precision": x.A,
    }


def element_record(a: CycloElement) -> dict:
    """Base-field values print one digit list; ring values print one list per zeta power."""
    if a.is_scalar():
        return scalar_record(a.coefficient(0))
    p, K = a.ring.p, a.K
    v, exact = a.valuation_or_cap()
    return {
        "value_digits": [_int_digits(c, p, K) for c in a.coeffs],
        "offset": a.e,
        "valuation": fmt_number(v) if exact else "inf",
        "precision": a.A,
    }


def element_text(a: CycloElement) -> str:
    if a.is_scalar():
        return format_digits(a.coefficient(0)) + f" mod {a.ring.p}^{a.A}"
    terms = []
    for i in range(a.ring.d):
        c = a.coefficient(i)
        if not c.is_zero():
            terms.append(f"({format_digits(c)})" + ("" if i == 0 else f"*z^{i}"))
    return (" + ".join(terms) or "0") + f" mod Phi({a.ring.p}^{a.ring.n}), {a.ring.p}^{a.A}"


def integral_record(res) -> dict:
    rec = element_record(res.value)
    return {
        "value_digits": rec["value_digits"],
        "valuation": rec["valuation"],
        "stable_digits": fmt_number(res.stable_digits),
        "level": res.level,
        "precision": res.precision,
    }


def spectral_record(tbl) -> dict:
    entries = []
    for k, val in enumerate(tbl.entries):
        rec = element_record(val)
        entries.append({"k": k, "value_digits": rec["value_digits"], "valuation": rec["valuation"]})
    return {
        "p": tbl.ring.p, "n": tbl.n, "N": tbl.N, "q": f"1+{tbl.q.q_minus_1}",
        "twist": tbl.twist, "entries": entries,
    }


def residual_fields(prefix: str, r) -> dict:
    return {
        f"{prefix}_residual_valuation": fmt_number(r.valuation),
        f"{prefix}_is_lower_bound": not r.exact,
    }


def verification_record(rep) -> dict:
    rec = {"identity": rep.identity}
    rec.update(residual_fields("literal", rep.literal))
    rec.update(residual_fields("corrected", rep.corrected))
    rec["levels"] = dict(rep.levels)
    rec["params"] = dict(rep.params)
    if rep.notes:
        rec["notes"] = list(rep.notes)
    return rec


def emit(records, fmt: str = "json", columns=None) -> str:
    """Render a list of flat-ish dict records. Output is byte-stable for equal input."""
    if fmt == "json":
        return json.dumps(records, separators=(",", ":")) + "\n"
    if fmt == "csv":
        columns = columns or list(records[0].keys()) if records else []
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_csv_cell(rec.get(c, "")) for c in columns])
        return buf.getvalue()
    if fmt == "text":
        lines = []
        for rec in records:
            lines.append("  ".join(f"{k}={_text_cell(v)}" for k, v in rec.items()))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _csv_cell(v):
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return v


def _text_cell(v):
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_text_cell(x)}" for k, x in v.items()) + "}"
    return str(v)


__all__ = [
    "element_record", "element_text", "emit", "fmt_number", "integral_record", "residual_fields",
    "scalar_record", "spectral_record", "verification_record",
]
