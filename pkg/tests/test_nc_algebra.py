import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncfib.nc_algebra import (NumericOracle, UnknownGenerator, ideal_membership,
                              invariant_generators, normal_form, preset, random_element,
                              solve_phase_constraints)
from ncfib.scalars import Scalar

S7 = preset("s7")
S4 = preset("s4")


def test_preset_generators():
    assert S7.names == ("z1", "z2", "z3", "z4", "zb1", "zb2", "zb3", "zb4")
    assert S4.names == ("a", "b", "ab", "bb", "x")
    assert preset("su2").names == ("w1", "w2", "wb1", "wb2")
    assert S4.Q == ((0, 2), (-2, 0))


def test_unknown_generator():
    with pytest.raises(UnknownGenerator):
        S7.gen("z5")


def test_s7_commutation_oracle():
    z1, z2, z3 = S7.gen("z1"), S7.gen("z2"), S7.gen("z3")
    assert z2 * z1 == z1 * z2
    assert z3 * z1 == z1 * z3 * Scalar.mu(-1)
    assert str(z3 * z1) == "mu^-1*z1*z3"
    assert str(normal_form(["z2", "z1"], S7)) == "z1*z2"
    total = sum((S7.gen(f"z{k}") * S7.gen(f"zb{k}") for k in range(1, 5)), S7.zero())
    assert total == S7.one()


def test_s4_relations():
    a, b, ab, bb, x = (S4.gen(g) for g in S4.names)
    assert b * a == a * b * Scalar.mu(-2)
    assert a * ab == ab * a
    assert a * ab + b * bb + x * x == S4.one()


def test_invariant_generators_oracle():
    alpha, beta, x = invariant_generators()
    assert str(alpha) == "2*z2*zb4 + 2*z1*zb3"
    assert str(beta) == "2*z2*z3 - 2*z1*z4"
    assert str(x) == "-1 + 2*z2*zb2 + 2*z1*zb1"


def test_ideal_membership_certificate():
    A = S4.ambient()
    R = S4.sphere_relation()
    cert = ideal_membership(A.gen("a") * R * A.gen("x"), [R])
    assert cert.member and cert.verified
    assert not ideal_membership(A.gen("a") * A.gen("x"), [R]).member


def test_phase_matrix_is_determined():
    rep = solve_phase_constraints()
    assert rep.consistent
    assert rep.rank == len(rep.unknowns) == 6
    assert rep.Q == S7.Q


seeds = st.integers(0, 2**32 - 1)
presets = st.sampled_from(["s7", "s4", "t2", "su2"])


@given(seeds, presets)
def test_associativity(seed, name):
    P = preset(name)
    rng = random.Random(seed)
    a, b, c = (random_element(P, rng, nterms=2, maxdeg=2) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@given(seeds, presets)
def test_adjoint_is_antimultiplicative(seed, name):
    P = preset(name)
    rng = random.Random(seed)
    a, b = random_element(P, rng), random_element(P, rng)
    assert (a * b).adjoint() == b.adjoint() * a.adjoint()
    assert a.adjoint().adjoint() == a


@given(seeds, st.sampled_from(["s7", "s4"]))
def test_numeric_oracle_is_multiplicative(seed, name):
    P = preset(name)
    rng = random.Random(seed)
    O = NumericOracle(P)
    pt = O.random_point(np.random.default_rng(seed))
    a, b = random_element(P, rng), random_element(P, rng)
    lhs = O.evaluate(a * b, pt)
    assert np.allclose(lhs, O.evaluate(a, pt) @ O.evaluate(b, pt), atol=1e-9)
    assert np.allclose(O.evaluate(a.adjoint(), pt), O.evaluate(a, pt).conj().T, atol=1e-9)
