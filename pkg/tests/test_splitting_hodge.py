from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncfib.exterior_calculus import ext_d
from ncfib.fibration import S4, projection
from ncfib.splitting_hodge import (ORIENTATION, OffSphere, UnsupportedPresentation, asd_residual,
                                   chirality, evaluate_at, frame_at, gamma_matrices,
                                   hermitian_pair_at, hodge_star_at, random_points,
                                   real_coordinates, split, torus_adjoint, torus_data,
                                   torus_mul, torus_word)
from ncfib.acceptance import classical_presentation
from ncfib.scalars import Scalar

P4 = S4()


def _p1():
    pm = projection(1)
    return [[pm.entry_s4(i, j) for j in range(4)] for i in range(4)]


def test_torus_words_oracle():
    assert torus_data(P4) == ((1, -1), (1, 1))
    assert torus_word(P4, (1, 0)) == (0, (1, -1))
    assert torus_word(P4, (0, 1)) == (0, (1, 1))
    # (u v^-1)(u v) = mu u^2
    assert torus_mul((1, -1), (1, 1)) == (1, (2, 0))
    assert torus_mul((1, 1), (1, -1)) == (-1, (2, 0))
    assert torus_adjoint((1, 1)) == (-1, (-1, -1))


def test_split_oracle():
    s = split(P4.gen("a") * P4.gen("b"))
    ((tw, terms),) = s.terms.items()
    assert tw == (2, 0)
    assert list(terms.values()) == [Scalar.mu(1)]


def test_split_is_multiplicative():
    a, b, x = P4.gen("a"), P4.gen("b"), P4.gen("x")
    assert split(a * b * x) == split(a) * split(b) * split(x)
    assert split(ext_d(a * b)) == split(ext_d(a)) * split(b) + split(a) * split(ext_d(b))


def test_unsupported_presentation():
    with pytest.raises(UnsupportedPresentation):
        torus_data(classical_presentation(P4))


def test_off_sphere_point_rejected():
    pt = random_points(P4, 1, 0)[0] * 2
    with pytest.raises(OffSphere):
        evaluate_at(ext_d(P4.gen("x")), pt)


def test_frame_is_orthonormal_tangent():
    pt = random_points(P4, 1, 3)[0]
    fr = frame_at(P4, pt)
    assert np.allclose(fr @ fr.T, np.eye(4))
    assert np.allclose(fr @ real_coordinates(P4, pt), 0)


def test_classical_metric_values():
    pt = random_points(P4, 1, 7)[0]
    x = real_coordinates(P4, pt)
    dx = hermitian_pair_at(ext_d(P4.gen("x")), ext_d(P4.gen("x")), pt)[(0, 0)]
    da = hermitian_pair_at(ext_d(P4.gen("a")), ext_d(P4.gen("a")), pt)[(0, 0)]
    assert abs(dx - (1 - x[4] ** 2)) < 1e-12
    assert abs(da - (2 - x[0] ** 2 - x[1] ** 2)) < 1e-12


def test_gamma_matrices_are_clifford():
    g = gamma_matrices()
    for i in range(4):
        for j in range(4):
            anti = g[i] @ g[j] + g[j] @ g[i]
            assert np.allclose(anti, 2 * np.eye(4) * (i == j))
    assert np.allclose(chirality() @ chirality(), np.eye(4))


def test_hodge_star_squares_to_one():
    pt = random_points(P4, 1, 5)[0]
    w = ext_d(P4.gen("a")) * ext_d(P4.gen("x"))
    v = evaluate_at(w, pt)
    vv = hodge_star_at(hodge_star_at(v))
    for k in v.components:
        assert np.allclose(vv.components[k], v.components[k])


def test_curvature_is_anti_selfdual():
    assert ORIENTATION == -1
    rep = asd_residual(_p1(), samples=20, seed=7)
    assert rep.passed and rep.max_residual < 1e-12
    assert rep.max_curvature > 0.1


def test_classical_instanton_fixes_orientation():
    assert asd_residual(_p1(), samples=10, seed=1, theta=0).passed


def test_perturbed_projection_is_detected():
    p = _p1()
    p[0][0] = p[0][0] + P4.gen("x") * Fraction(1, 10)
    assert asd_residual(p, samples=10, seed=7).max_residual > 1e-3


@given(st.integers(0, 2**32 - 1))
def test_random_points_lie_on_sphere(seed):
    (pt,) = random_points(P4, 1, seed)
    x = real_coordinates(P4, pt)
    assert abs(np.linalg.norm(x) - 1) < 1e-12
    fr = frame_at(P4, pt)
    assert np.allclose(fr @ x, 0, atol=1e-12)
