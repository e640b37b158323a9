import random

import pytest
from hypothesis import given, strategies as st

from ncfib.fibration import (S4, S7, binomials, matches_reference, module_iso, phi_kets,
                             projection, projection_equivalence_check, s4_to_s7, s7_to_s4,
                             su2_valuedness_check)
from ncfib.nc_algebra import random_element

P1_ROW0 = ["1/2 + 1/2*x", "0", "1/2*a", "1/2*b"]
P1_ROW2 = ["1/2*ab", "-1/2*mu^-1*b", "1/2 - 1/2*x", "0"]


def test_p1_oracle():
    p = projection(1)
    assert [str(p.entry_s4(0, j)) for j in range(4)] == P1_ROW0
    assert [str(p.entry_s4(2, j)) for j in range(4)] == P1_ROW2
    assert matches_reference()


def test_p2_corner_is_classical_square():
    corner = projection(2).entry_s4(0, 0)
    assert str(corner) == "1/2 + 1/2*x - 1/4*b*bb - 1/4*a*ab"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_projection_laws(n):
    p = projection(n)
    assert p.size == 4 ** n
    assert p.check_selfadjoint()
    assert p.check_idempotent()
    assert p.check_coinvariant()
    assert p.trace() == S7().one() * (n + 1)


def test_binomials_and_kets():
    assert binomials(3) == [1, 3, 3, 1]
    assert len(phi_kets(2)) == 3


def test_equivalence_and_su2():
    assert projection_equivalence_check().passed
    rep = su2_valuedness_check(1)
    assert rep.solvable and rep.matches_rho


@pytest.mark.parametrize("seed", range(5))
def test_module_iso_round_trip(seed):
    rng = random.Random(seed)
    iso = module_iso(1)
    f = [random_element(S4(), rng, nterms=2, maxdeg=1) for _ in range(4)]
    sigma = iso.to_module(f)
    phi = iso.from_section(sigma)
    assert iso.to_section(phi) == sigma
    assert iso.is_coequivariant(phi)


@given(st.integers(0, 2**32 - 1))
def test_s4_embeds_as_coinvariants(seed):
    rng = random.Random(seed)
    a = random_element(S4(), rng, nterms=3, maxdeg=2)
    b = random_element(S4(), rng, nterms=3, maxdeg=2)
    assert s4_to_s7(a * b) == s4_to_s7(a) * s4_to_s7(b)
    assert s4_to_s7(a.adjoint()) == s4_to_s7(a).adjoint()
    assert s7_to_s4(s4_to_s7(a)) == a
