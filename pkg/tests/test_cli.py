import json

import pytest
from hypothesis import given, strategies as st

from ncfib.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, ParseError, evaluate_text, main, render
from ncfib.nc_algebra import UnknownGenerator


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("text,preset,expected", [
    ("z1*z2", "s7", "z1*z2"),
    ("(z1 + z2)^2", "s7", "z2^2 + 2*z1*z2 + z1^2"),
    ("z1*", "s7", "zb1"),
    ("(z1*z3)*", "s7", "mu^-1*zb1*zb3"),
    ("2/3*mu^-1*z1", "s7", "2/3*mu^-1*z1"),
    ("sqrt(2)*i*z1", "s7", "i*sqrt(2)*z1"),
    ("z3*z1 - mu^-1*z1*z3", "s7", "0"),
    ("d(z1) d(z1)", "s7", "0"),
    ("d(d(z1*z2))", "s7", "0"),
    ("delta(z1)*delta(z2)", "s7", "delta(z1)*delta(z2)"),
    ("z1 (x) w1", "s7", "z1 (x) w1"),
    ("b*a", "s4", "mu^-2*a*b"),
    ("d(b)*d(a)", "s4", "-mu^-2*d(a)*d(b)"),
    ("a*ab + b*bb + x^2", "s4", "1"),
])
def test_expression_oracles(text, preset, expected):
    assert render(evaluate_text(text, preset)) == expected


@pytest.mark.parametrize("text,column", [("z1 +", 5), ("z1 ^ z2", 6), ("(z1", 4), ("z1 $ z2", 4)])
def test_parse_errors_carry_position(text, column):
    with pytest.raises(ParseError) as err:
        evaluate_text(text, "s7")
    assert err.value.line == 1 and err.value.column == column


def test_unary_minus_only_leads_a_sum():
    assert render(evaluate_text("-z1 + z1", "s7")) == "0"
    with pytest.raises(ParseError):
        evaluate_text("z1 - -z1", "s7")


def test_unknown_generator():
    with pytest.raises(UnknownGenerator):
        evaluate_text("z5", "s7")


def test_nf_command(capsys):
    code, rep = run(capsys, "nf", "--preset", "s7", "z3*z1 - mu^-1*z1*z3")
    assert code == EXIT_PASS
    assert rep["schema"] == "ncfib-report/1"
    assert rep["results"]["normal_form"] == "0"
    assert rep["timing_seconds"] is None


def test_nf_expect_mismatch(capsys):
    code, rep = run(capsys, "nf", "--preset", "s4", "b*a", "--expect", "a*b")
    assert code == EXIT_FAIL and not rep["pass"]


def test_nf_usage_error(capsys):
    code, rep = run(capsys, "nf", "--preset", "s7", "z5")
    assert code == EXIT_USAGE and "unknown generator" in rep["error"]


def test_index_command(capsys):
    code, rep = run(capsys, "index", "--n", "2", "--timings")
    assert code == EXIT_PASS
    assert rep["results"]["index"] == 4
    assert rep["timing_seconds"] >= 0


def test_projection_and_asd_commands(capsys):
    code, rep = run(capsys, "projection", "--n", "1")
    assert code == EXIT_PASS and all(rep["checks"].values())
    code, rep = run(capsys, "asd", "--n", "1", "--samples", "10")
    assert code == EXIT_PASS and rep["checks"]["negative_control_detected"]


def test_chern_low_degrees(capsys):
    code, rep = run(capsys, "chern", "--k", "0", "--n", "3")
    assert code == EXIT_PASS and rep["results"]["value"] == "4"
    code, rep = run(capsys, "chern", "--k", "1", "--n", "2")
    assert code == EXIT_PASS and rep["results"]["zero_test"] == "zero"


small = st.integers(-4, 4)


@given(small, small, st.integers(1, 5))
def test_scalar_expressions_round_trip(k, m, den):
    text = f"({m}/{den})*mu^{k}*z1 - ({m}/{den})*mu^{k}*z1"
    assert render(evaluate_text(text, "s7")) == "0"
    text = f"(mu^{k}*z1*z3)* - mu^{-k}*(z1*z3)*"
    assert render(evaluate_text(text, "s7")) == "0"
