import cmath
from fractions import Fraction

from hypothesis import given, strategies as st

from ncfib.scalars import (Scalar, ScalarFraction, radical_product, render_scalar,
                           squarefree_split)


def test_squarefree_split_oracle():
    assert squarefree_split(12) == (2, 3)
    assert squarefree_split(50) == (5, 2)
    assert squarefree_split(1) == (1, 1)
    assert radical_product(6, 10) == (2, 15)


def test_radicals_multiply_exactly():
    assert Scalar.sqrt(2) * Scalar.sqrt(2) == Scalar(2)
    assert render_scalar(Scalar.sqrt(2) * Scalar.sqrt(3)) == "sqrt(6)"
    assert Scalar.i() * Scalar.i() == Scalar(-1)


def test_mu_powers_and_conjugation():
    assert Scalar.mu(2) * Scalar.mu(-2) == Scalar(1)
    assert Scalar.mu(1).conj() == Scalar.mu(-1)
    assert render_scalar(Scalar.mu(1) + Scalar.mu(-1)) == "mu^-1 + mu^1"


def test_numeric_value_of_mu():
    # mu = exp(i pi theta)
    z = Scalar.mu(1).eval_numeric(Fraction(1, 3))
    assert abs(z - cmath.exp(1j * cmath.pi / 3)) < 1e-12
    assert Scalar.mu(3).subs_mu(0) == Scalar(1)


def test_inverse_is_a_fraction():
    inv = Scalar.mu(2).invert()
    assert isinstance(inv, ScalarFraction)
    assert inv.as_scalar() == Scalar.mu(-2)


small = st.integers(-3, 3)


@st.composite
def scalars(draw):
    s = Scalar(Fraction(draw(small), draw(st.integers(1, 4))))
    s = s + Scalar.mu(draw(small)) * draw(small)
    if draw(st.booleans()):
        s = s + Scalar.sqrt(draw(st.sampled_from([2, 3, 6]))) * draw(small)
    if draw(st.booleans()):
        s = s * Scalar.i()
    return s


@given(scalars(), scalars(), scalars())
def test_ring_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a


@given(scalars(), scalars())
def test_conjugation_is_a_ring_involution(a, b):
    assert (a * b).conj() == a.conj() * b.conj()
    assert a.conj().conj() == a


@given(scalars(), scalars(), st.sampled_from([Fraction(1, 3), Fraction(1, 7), Fraction(2, 5)]))
def test_numeric_evaluation_is_a_homomorphism(a, b, theta):
    lhs = (a * b + a).eval_numeric(theta)
    rhs = a.eval_numeric(theta) * b.eval_numeric(theta) + a.eval_numeric(theta)
    assert abs(lhs - rhs) < 1e-9
