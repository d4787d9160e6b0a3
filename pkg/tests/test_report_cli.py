import io
import json
import subprocess
import sys

from fractions import Fraction

import pytest

from qvolk.cli import build_parser, run_command
from qvolk.padic import INF, PadicScalar, format_digits
from qvolk.report import emit, fmt_number, scalar_record


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_integrate_one_is_exact():
    code, out, _ = run("integrate", "--f", "1", "--q", "3/1", "--levels", "1..6")
    assert code == 0
    assert json.loads(out) == [{
        "value_digits": [1], "valuation": 0, "stable_digits": "inf", "level": 6, "precision": 10, "f": "1",
    }]
    assert out.startswith('[{"value_digits":[1],"valuation":0,"stable_digits":"inf","level":6')


def test_bernoulli_csv():
    code, out, _ = run("bernoulli", "--p", "3", "--max-m", "6", "--N", "10", "--M", "20", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "m,exact,computed,agree_digits"
    assert len(lines) == 8
    assert lines[2].startswith("1,-1/2,")
    for row in lines[1:]:
        agree = row.rsplit(",", 1)[1]
        assert agree == "inf" or int(agree) >= 5


def test_text_rendering_of_one_half():
    half = PadicScalar.from_rational(Fraction(1, 2), 3, 3)
    assert format_digits(half) == "2 + 1*3 + 1*9"
    assert scalar_record(half) == {"value_digits": [2, 1, 1], "valuation": 0, "precision": 3}
    assert emit([{"value": format_digits(half)}], "text") == "value=2 + 1*3 + 1*9\n"


def test_fmt_number():
    assert fmt_number(3) == 3 and fmt_number(Fraction(5, 6)) == "5/6" and fmt_number(INF) == "inf"


def test_verify_example():
    code, out, _ = run("verify", "--suite", "prop1,mult", "--f", "x", "--g", "x^2", "--p", "3", "--q", "3/1", "--n", "2")
    assert code == 0
    recs = json.loads(out)
    assert [r["identity"] for r in recs] == ["prop1", "mult"]
    for r in recs:
        assert {"literal_residual_valuation", "corrected_residual_valuation", "levels", "params"} <= set(r)


def test_transform_with_inversion():
    code, out, _ = run("transform", "--f", "x", "--n", "1", "--q", "3/1", "--invert-at", "2")
    rec = json.loads(out)[0]
    assert code == 0 and rec["N"] == 1 and len(rec["entries"]) == 3 and rec["inverse_at"] == 2


@pytest.mark.parametrize("argv", [
    ["integrate", "--f", "x^", "--levels", "1..3"],
    ["integrate", "--f", "x", "--q", "1/2"],
    ["integrate", "--f", "x", "--p", "4"],
    ["integrate", "--f", "x", "--M", "3"],
    ["verify", "--suite", "thm9"],
    ["integrate", "--bogus"],
    ["frobnicate"],
])
def test_config_errors_exit_2(argv):
    code, out, err = run(*argv)
    assert code == 2 and out == ""


def test_parse_error_reports_position():
    code, _, err = run("integrate", "--f", "x + foo", "--levels", "1..3")
    assert code == 2 and "position 4" in err


def test_min_digits_exit_3():
    code, out, _ = run("verify", "--suite", "thm3", "--f", "x", "--g", "x", "--q", "3/1", "--N", "4",
                       "--min-digits", "40")
    assert code == 3 and json.loads(out)


def test_determinism():
    argv = ["verify", "--q", "3/1", "--N", "4", "--seed", "5"]
    assert run(*argv) == run(*argv)


def test_precision_environment_variable(monkeypatch):
    monkeypatch.setenv("QVOLK_PRECISION", "12")
    assert build_parser().parse_args(["integrate"]).M == 12
    monkeypatch.delenv("QVOLK_PRECISION")
    assert build_parser().parse_args(["integrate"]).M == 16


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qvolk", "integrate", "--f", "1", "--levels", "1..2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)[0]["value_digits"] == [1]
