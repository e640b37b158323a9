"""Splitting homomorphism and the pointwise Hodge star.

An element of a twisted algebra (or a form over it) is sent to classical
polynomial data tensored with words u^a v^b in a noncommutative two-torus
with v u = mu^{-1} u v.  A generator pair j with clock-and-shift data
(a_j, b_j) carries u^{a_j} v^{b_j}; the four-sphere uses the data induced
from the seven-sphere, so alpha carries u v^{-1} and beta carries u v.

The classical leg is then evaluated numerically at points of the sphere in
an oriented orthonormal tangent frame; torus words stay symbolic.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._forms import Form, merge_sorted, word_charge
from .exterior_calculus import ExteriorForm, matrix_product
from .nc_algebra import AlgebraElement, Presentation, PresentationError
from .scalars import Scalar

TORUS_DATA = {"s4": ((1, -1), (1, 1))}
DEFAULT_THETA = Fraction(1, 3)
# sign fixed so that the classical basic instanton is anti-selfdual
ORIENTATION = -1


class UnsupportedPresentation(PresentationError):
    pass


class OffSphere(ValueError):
    pass


class DegreeError(ValueError):
    pass


def torus_data(P: Presentation) -> tuple:
    d = TORUS_DATA.get(P.name, P.symplectic)
    if d is None:
        raise UnsupportedPresentation(f"no splitting for {P.name}")
    return d


def torus_mul(w1: tuple, w2: tuple) -> tuple:
    """(u^a v^b)(u^c v^d) = mu^{-bc} u^{a+c} v^{b+d}: returns (phase, word)."""
    return -w1[1] * w2[0], (w1[0] + w2[0], w1[1] + w2[1])


def torus_word(P: Presentation, c: tuple) -> tuple:
    """U^c = prod_j (u^{a_j} v^{b_j})^{c_j} in normal order: (phase, word)."""
    data = torus_data(P)
    ph, w = 0, (0, 0)
    for (a, b), cj in zip(data, c):
        if cj >= 0:
            f, s = (a, b), 0
        else:
            f, s = (-a, -b), -a * b      # (u^a v^b)^-1 = mu^{-ab} u^-a v^-b
        for _ in range(abs(cj)):
            p, w = torus_mul(w, f)
            ph += p + s
    return ph, w


def torus_adjoint(w: tuple) -> tuple:
    """(u^a v^b)^* = v^-b u^-a = mu^{-ab} u^-a v^-b."""
    return -w[0] * w[1], (-w[0], -w[1])


@dataclass
class SplitForm:
    """{torus word: {(letters, classical monomial key): Scalar}}."""

    P: Presentation
    kind: str           # "fun", "fo" or "ext"
    terms: dict

    def degree(self) -> int:
        ds = {len(w) for t in self.terms.values() for (w, _) in t}
        return max(ds, default=0)

    def __mul__(self, o: "SplitForm") -> "SplitForm":
        P = self.P
        kind = self.kind if self.kind != "fun" else o.kind
        out: dict = {}
        for t1, d1 in self.terms.items():
            for t2, d2 in o.terms.items():
                ph, tw = torus_mul(t1, t2)
                d = out.setdefault(tw, {})
                for (w1, m1), c1 in d1.items():
                    for (w2, m2), c2 in d2.items():
                        if kind == "ext":
                            w, s = merge_sorted(w1, w2)
                            if w is None:
                                continue
                        else:
                            w, s = w1 + w2, 1
                        key = (w, m1 + m2)
                        v = c1 * c2 * Scalar.mu(ph) * s
                        d[key] = d.get(key, 0) + v
        return SplitForm(P, kind, _clean(out))

    def __add__(self, o: "SplitForm") -> "SplitForm":
        out = {t: dict(d) for t, d in self.terms.items()}
        for t, d in o.terms.items():
            dd = out.setdefault(t, {})
            for k, v in d.items():
                dd[k] = dd.get(k, 0) + v
        return SplitForm(self.P, self.kind if self.kind != "fun" else o.kind, _clean(out))

    def __neg__(self):
        return SplitForm(self.P, self.kind, {t: {k: -v for k, v in d.items()}
                                             for t, d in self.terms.items()})

    def __sub__(self, o):
        return self + (-o)

    def d(self) -> "SplitForm":
        """Classical exterior (or first order) derivative on the classical leg."""
        P = self.P
        kind = "ext" if self.kind in ("fun", "ext") else "fo"
        out: dict = {}
        for t, dd in self.terms.items():
            o = out.setdefault(t, {})
            for (w, m), c in dd.items():
                p = len(w)
                for h in range(P.nv):
                    e = (m >> P.sh[h]) & 0xFF
                    if not e:
                        continue
                    m2 = m - (1 << P.sh[h])
                    if kind == "ext":
                        nw, s = merge_sorted((h,), w)
                        if nw is None:
                            continue
                    else:
                        nw, s = w + (h,), (-1 if p % 2 else 1)
                    key = (nw, m2)
                    o[key] = o.get(key, 0) + c * (e * s)
        return SplitForm(P, kind, _clean(out))


def _clean(out: dict) -> dict:
    res = {}
    for t, d in out.items():
        d = {k: v for k, v in d.items() if not _is_zero(v)}
        if d:
            res[t] = d
    return res


def _is_zero(v) -> bool:
    return v == 0 if not isinstance(v, Scalar) else v.is_zero()


def split(e) -> SplitForm:
    if isinstance(e, AlgebraElement):
        P, items, kind = e.P, [((), e._t)], "fun"
    elif isinstance(e, Form):
        P, items, kind = e.P, list(e._w.items()), e.kind
    else:
        raise TypeError("split expects an algebra element or a form")
    torus_data(P)
    out: dict = {}
    for w, t in items:
        cw = word_charge(P, w)
        for k, v in t.items():
            m = k & P.MONOMASK
            mu, d, i = P.scalar_fields(k)
            c = tuple(x + y for x, y in zip(cw, P.charge(m)))
            ph, tw = torus_word(P, c)
            coeff = Scalar._raw({(mu + ph, d, i): Fraction(v)})
            dd = out.setdefault(tw, {})
            dd[(w, m)] = dd.get((w, m), 0) + coeff
    return SplitForm(P, kind, _clean(out))


# -- numerics ---------------------------------------------------------------------

def scalar_value(s, theta=DEFAULT_THETA) -> complex:
    if not isinstance(s, Scalar):
        return complex(s)
    return s.eval_numeric(theta)


def real_coordinates(P: Presentation, point) -> np.ndarray:
    n = P.npairs
    z = np.asarray(point[:n])
    rest = np.asarray(point[2 * n:]).real
    return np.concatenate([np.column_stack([z.real, z.imag]).ravel(), rest])


def from_real(P: Presentation, v) -> np.ndarray:
    """Generator values (z, zbar, x) of a real ambient vector."""
    n = P.npairs
    zc = v[0:2 * n:2] + 1j * v[1:2 * n:2]
    return np.concatenate([zc, zc.conj(), np.asarray(v[2 * n:], dtype=complex)])


def random_points(P: Presentation, count: int, seed: int) -> list:
    """Seeded uniform points (normalized Gaussians), one child seed per point."""
    dim = 2 * P.npairs + len(P.central)
    out = []
    for s in np.random.SeedSequence(seed).spawn(count):
        v = np.random.default_rng(s).normal(size=dim)
        out.append(from_real(P, v / np.linalg.norm(v)))
    return out


def frame_at(P: Presentation, point) -> np.ndarray:
    """Oriented orthonormal tangent frame (rows, real ambient coordinates) by
    Gram-Schmidt on the coordinate directions."""
    x = real_coordinates(P, point)
    if abs(np.linalg.norm(x) - 1) > 1e-12:
        raise OffSphere("point is not on the unit sphere")
    dim = x.size
    basis = [x]
    for i in np.argsort(np.abs(x)):
        v = np.zeros(dim)
        v[i] = 1.0
        for b in basis:
            v = v - (v @ b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            basis.append(v / nv)
        if len(basis) == dim:
            break
    F = np.array(basis[1:])
    if np.linalg.det(np.vstack([x, F])) * ORIENTATION < 0:
        F[-1] = -F[-1]
    return F


@dataclass
class PointEvaluation:
    point: np.ndarray
    frame: np.ndarray
    degree: int
    components: dict        # torus word -> complex array of shape (dim,)*degree

    def word(self, w) -> np.ndarray:
        z = np.zeros((self.frame.shape[0],) * self.degree, dtype=complex)
        return self.components.get(w, z)


def _antisymmetrize(T: np.ndarray) -> np.ndarray:
    p = T.ndim
    if p < 2:
        return T
    out = np.zeros_like(T)
    for perm in itertools.permutations(range(p)):
        inv = sum(1 for i in range(p) for j in range(i + 1, p) if perm[i] > perm[j])
        out += (-1) ** inv * np.transpose(T, perm)
    return out


def evaluate_at(f, point, frame=None, theta=DEFAULT_THETA) -> PointEvaluation:
    if not isinstance(f, SplitForm):
        f = split(f)
    P = f.P
    x = real_coordinates(P, point)
    if abs(np.linalg.norm(x) - 1) > 1e-12:
        raise OffSphere("point is not on the unit sphere")
    if frame is None:
        frame = frame_at(P, point)
    if f.degree() > 4:
        raise DegreeError("forms of degree at most 4")
    vecs = [from_real(P, e) for e in frame]          # generator values on frame vectors
    V = np.array(vecs).T                              # V[g, i] = dg(e_i)
    dim = frame.shape[0]
    p = f.degree()
    comps = {}
    for tw, d in f.terms.items():
        acc = np.zeros((dim,) * p, dtype=complex)
        for (w, m), c in d.items():
            if len(w) != p:
                raise DegreeError("inhomogeneous form")
            val = scalar_value(c, theta)
            for g, e in enumerate(P.exps(m)):
                if e:
                    val *= point[g] ** e
            if val == 0:
                continue
            T = np.array(val)
            for g in w:
                T = np.multiply.outer(T, V[g])
            acc += T
        if f.kind == "ext":
            acc = _antisymmetrize(acc)
        comps[tw] = acc
    return PointEvaluation(np.asarray(point), frame, p, comps)


EPS4 = np.zeros((4, 4, 4, 4))
for _perm in itertools.permutations(range(4)):
    EPS4[_perm] = (-1) ** sum(1 for i in range(4) for j in range(i + 1, 4) if _perm[i] > _perm[j])


def hodge_star_at(v: PointEvaluation) -> PointEvaluation:
    """(*F)_kl = 1/2 eps_ijkl F_ij on 2-forms in dimension four."""
    if v.degree != 2 or v.frame.shape[0] != 4:
        raise DegreeError("Hodge star implemented for 2-forms on a 4-manifold")
    comps = {w: 0.5 * np.einsum("ijkl,ij->kl", EPS4, F) for w, F in v.components.items()}
    return PointEvaluation(v.point, v.frame, 2, comps)


@dataclass
class ASDReport:
    n: int
    samples: int
    seed: int
    tol: float
    max_residual: float
    per_point: list
    max_curvature: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def curvature(p: list) -> list:
    """F = p dp dp in the exterior calculus."""
    pf = [[ExteriorForm.from_algebra(x) for x in row] for row in p]
    dp = [[x.d() for x in row] for row in pf]
    return matrix_product(matrix_product(pf, dp), dp)


def asd_residual(p: list, samples: int = 100, seed: int = 7, tol: float = 1e-9,
                 n: int = 1, theta=DEFAULT_THETA) -> ASDReport:
    F = curvature(p)
    P = p[0][0].P
    entries = [split(f) for row in F for f in row if not f.is_raw_zero()]
    per_point = []
    worst, fmax = 0.0, 0.0
    for pt in random_points(P, samples, seed):
        fr = frame_at(P, pt)
        r = 0.0
        for s in entries:
            ev = evaluate_at(s, pt, fr, theta)
            st = hodge_star_at(ev)
            for w, comp in ev.components.items():
                r = max(r, float(np.abs(st.components[w] + comp).max()))
                fmax = max(fmax, float(np.abs(comp).max()))
        per_point.append(r)
        worst = max(worst, r)
    return ASDReport(n, samples, seed, tol, worst, per_point, fmax)


def hermitian_pair_at(omega, eta, point, theta=DEFAULT_THETA) -> dict:
    """<omega, eta> = *(omega^* ^ *eta) per torus word (pointwise inner product
    of the classical legs, torus words multiplied as w1^* w2)."""
    a = omega if isinstance(omega, PointEvaluation) else evaluate_at(split(omega), point,
                                                                      theta=theta)
    b = eta if isinstance(eta, PointEvaluation) else evaluate_at(split(eta), point,
                                                                  theta=theta)
    if a.degree != b.degree:
        raise DegreeError("hermitian pairing needs equal degrees")
    mu = cmath.exp(1j * math.pi * float(theta))
    fact = 1.0 / math.factorial(a.degree)
    out: dict = {}
    for w1, A in a.components.items():
        ph1, w1s = torus_adjoint(w1)
        for w2, B in b.components.items():
            ph2, w = torus_mul(w1s, w2)
            val = fact * np.vdot(A, B) * mu ** (ph1 + ph2)
            out[w] = out.get(w, 0) + val
    return out


# -- Clifford image -----------------------------------------------------------------

def gamma_matrices() -> list:
    """Hermitian Euclidean gamma matrices with {g_i, g_j} = 2 delta_ij."""
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    I2 = np.eye(2)
    return [np.kron(s1, s) for s in (s1, s2, s3)] + [np.kron(s2, I2)]


def chirality() -> np.ndarray:
    g = gamma_matrices()
    return g[0] @ g[1] @ g[2] @ g[3]


def clifford_image_at(f: SplitForm, point, frame=None, theta=DEFAULT_THETA) -> dict:
    """pi_D on the classical leg: d g_1 ... d g_p -> c(d g_1) ... c(d g_p),
    returned per torus word as a 4x4 matrix."""
    ev = evaluate_at(f, point, frame, theta)
    g = gamma_matrices()
    out = {}
    for w, T in ev.components.items():
        M = np.zeros((4, 4), dtype=complex)
        for idx in itertools.product(range(4), repeat=ev.degree):
            c = T[idx]
            if c == 0:
                continue
            G = np.eye(4, dtype=complex)
            for i in idx:
                G = G @ g[i]
            M += c * G
        out[w] = M
    return out
