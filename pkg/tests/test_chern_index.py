from fractions import Fraction

import pytest

from ncfib.chern_index import (CONSTANTS, MAX_N, NoProportionality, SizeCapExceeded, c_n, chern,
                               chern_two_paths_report,
                               clifford_proportionality, index, lemma_techn_report, lift_to_s7,
                               lift_to_s7_slow, mu_k, naive_trace, proportionality,
                               proportionality_exterior, to_exterior, _raw_trace)
from ncfib.first_order_calculus import fo_is_zero_in_quotient

CH2_P1_EXTERIOR = (
    "-9*mu^-2*d(a)*d(b)*d(ab)*d(bb)*x + 9*mu^-2*d(a)*d(b)*d(ab)*d(x)*bb"
    " - 9*d(a)*d(b)*d(bb)*d(x)*ab + 9*d(a)*d(ab)*d(bb)*d(x)*b"
    " - 9*mu^-2*d(b)*d(ab)*d(bb)*d(x)*a")


def test_normalisations():
    assert (mu_k(0), mu_k(1), mu_k(2)) == (1, -2, 12)
    assert [c_n(n) for n in range(1, 6)] == [1, 4, 10, 20, 35]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ch0(n):
    assert chern(0, n).form == chern(0, n).form.P.one() * (n + 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ch1_vanishes(n):
    f = chern(1, n).form
    assert fo_is_zero_in_quotient(f, None, "canonical").verdict == "zero"


def test_ch2_p1_oracle():
    assert str(to_exterior(chern(2, 1).form)) == CH2_P1_EXTERIOR


@pytest.mark.parametrize("k,n", [(1, 1), (1, 2), (2, 1)])
def test_gauge_kernel_matches_naive_trace(k, n):
    assert (naive_trace(k, n) - _raw_trace(k, n)).canonical().is_raw_zero()


def test_size_cap():
    with pytest.raises(SizeCapExceeded):
        chern(2, MAX_N[2] + 1)


def test_fast_and_slow_lift_agree():
    f = chern(2, 1, normalized=False).form
    assert lift_to_s7(f) == lift_to_s7_slow(f)


@pytest.mark.parametrize("n", [1, 2])
def test_trace_lemma(n):
    rep = lemma_techn_report(n)
    assert rep.passed
    assert rep.coefficient == c_n(n)


def test_exterior_proportionality():
    assert proportionality_exterior(2) == Fraction(4)
    assert proportionality_exterior(3) == Fraction(10)


def test_omega_d_proportionality_status():
    # holds trivially for n = 1; fails for n = 2 in the first-order calculus
    assert proportionality(1) == 1
    with pytest.raises(NoProportionality):
        proportionality(2)


def test_clifford_image_is_proportional():
    rep = clifford_proportionality(2, samples=2)
    assert rep.max_residual < 1e-9
    assert abs(rep.gamma_coefficient - 3) < 1e-9


def test_index_values():
    assert CONSTANTS.gamma_pairing == 3
    assert [index(n, proportionality_exterior(n)) for n in (1, 2)] == [1, 4]
    assert index(5) == 35


def test_two_paths_at_n1():
    rep = chern_two_paths_report(1)
    assert rep.exterior_equal
    # Omega_D is not closed under d on positive-degree forms
    assert not rep.omega_d_equal
