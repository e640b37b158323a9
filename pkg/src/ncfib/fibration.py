"""Kets on the 7-sphere, the projections p_(n), Grassmannian connections and
the coequivariant-module isomorphism."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .exterior_calculus import ExteriorForm
from .nc_algebra import (AlgebraElement, LinearSpan, _compositions, element_vector,
                         invariant_generators, preset)
from .scalars import Scalar, ScalarFraction


def S7():
    return preset("s7")


def S4():
    return preset("s4")


# -- kets ------------------------------------------------------------------------

class KetVector:
    """Column of algebra elements with the pairing <xi|eta> = sum xi_j^* eta_j."""

    __slots__ = ("components",)

    def __init__(self, components):
        self.components = list(components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, o):
        return KetVector([a + b for a, b in zip(self, o)])

    def __sub__(self, o):
        return KetVector([a - b for a, b in zip(self, o)])

    def scale(self, s):
        return KetVector([a * s for a in self])

    def __eq__(self, o):
        return isinstance(o, KetVector) and self.components == o.components

    def pair(self, o) -> AlgebraElement:
        """<self|o>."""
        s = None
        for a, b in zip(self, o):
            t = a.adjoint() * b
            s = t if s is None else s + t
        return s

    def tensor(self, o) -> "KetVector":
        """Ordered tensor product; component (i, j) is self_i o_j."""
        return KetVector([a * b for a in self for b in o])

    def render(self) -> list:
        return [c.render() for c in self]


def psi_kets():
    P = S7()
    z1, z2, z3, z4, zb1, zb2, zb3, zb4 = P.gens("z1", "z2", "z3", "z4", "zb1", "zb2", "zb3", "zb4")
    return KetVector([z1, -zb2, z3, -zb4]), KetVector([z2, zb1, z4, zb3])


def psi_tilde_kets():
    P = S7()
    z1, z2, z3, z4, zb1, zb2, zb3, zb4 = P.gens("z1", "z2", "z3", "z4", "zb1", "zb2", "zb3", "zb4")
    mu = Scalar.mu()
    return KetVector([z1, -(zb2 * mu), z3, -zb4]), KetVector([z2, zb1 * mu, z4, zb3])


def sym_words(n: int, k: int) -> list:
    """Distinct words with n-k+1 letters 0 and k-1 letters 1."""
    return sorted(set(itertools.permutations([0] * (n - k + 1) + [1] * (k - 1))))


@lru_cache(maxsize=None)
def u_kets(n: int) -> tuple:
    """Unnormalised symmetrised kets u_k, k = 1..n+1 (sum over distinct words)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    psi = psi_kets()
    out = []
    for k in range(1, n + 2):
        acc = None
        for w in sym_words(n, k):
            t = psi[w[0]]
            for a in w[1:]:
                t = t.tensor(psi[a])
            acc = t if acc is None else acc + t
        out.append(acc)
    return tuple(out)


def binomials(n: int) -> list:
    return [comb(n, k - 1) for k in range(1, n + 2)]


def phi_kets(n: int) -> list:
    """|phi_k> = u_k / a_k with a_k^2 = binom(n, k-1)."""
    out = []
    for u, b in zip(u_kets(n), binomials(n)):
        out.append(u if b == 1 else u.scale(Scalar.sqrt(b) * Fraction(1, b)))
    return out


# -- S^4 <-> S^7 --------------------------------------------------------------------

@lru_cache(maxsize=None)
def _s4_images():
    a, b, x = invariant_generators(S7())
    return {"a": a, "b": b, "ab": a.adjoint(), "bb": b.adjoint(), "x": x}


_S4_MONO_CACHE: dict = {}


def _s4_mono_image(m: int) -> AlgebraElement:
    r = _S4_MONO_CACHE.get(m)
    if r is not None:
        return r
    Q = S4()
    imgs = _s4_images()
    ex = Q.exps(m)
    r = S7().one()
    for g, e in enumerate(ex):
        for _ in range(e):
            r = r * imgs[Q.names[g]]
    ph = Q.ordered_phase(ex)
    if ph:
        r = r * Scalar.mu(-ph)
    _S4_MONO_CACHE[m] = r
    return r


def s4_to_s7(e: AlgebraElement) -> AlgebraElement:
    """The inclusion of A(S^4) as coinvariants of A(S^7)."""
    Q = S4()
    out = S7().zero()
    for k, v in e._t.items():
        mu, d, ie = Q.scalar_fields(k)
        out = out + _s4_mono_image(k & Q.MONOMASK) * Scalar._raw({(mu, d, ie): Fraction(v)})
    return out


class NotInSubalgebra(ValueError):
    pass


@lru_cache(maxsize=None)
def _s4_span(max_deg: int):
    Q = S4()
    span = LinearSpan()
    for d in range(max_deg + 1):
        for ex in _compositions(d, Q.nv):
            m = Q.mono_key(ex)
            if Q.is_reduced(m):
                img = _s4_mono_image(m)
                span.add(element_vector(S7(), img._t), m)
    return span


def s7_to_s4(e: AlgebraElement) -> AlgebraElement:
    """Express a coinvariant S^7 element in the S^4 generators (linear solve)."""
    Q = S4()
    if e.is_zero():
        return Q.zero()
    deg = max(e.P.degree(k) for k in e._t)
    ok, combo = _s4_span((deg + 1) // 2).contains(element_vector(e.P, e._t))
    if not ok:
        raise NotInSubalgebra("element is not in the image of A(S^4)")
    out = Q.zero()
    for m, c in combo.items():
        c = LinearSpan._f(c)
        if not c.den.is_one():
            raise NotInSubalgebra("non-polynomial coefficient")
        out = out + AlgebraElement(Q, {Q.ZERO + m: Fraction(1)}) * c.num
    return out


# -- projections ------------------------------------------------------------------------

def _mu_ratio(a: AlgebraElement, b: AlgebraElement):
    """h with a == mu^h b, or None."""
    if a.is_zero() or b.is_zero():
        return None
    P = a.P
    kb = min(b._t)
    vb = b._t[kb]
    mb = kb & P.MONOMASK
    for ka, va in a._t.items():
        if ka & P.MONOMASK == mb and va == vb:
            h = P.scalar_fields(ka)[0] - P.scalar_fields(kb)[0]
            if a == b * Scalar.mu(h):
                return h
    return None


class ProjectionMatrix:
    """p_(n) = sum_k |u_k><u_k| / binom(n, k-1), stored on orbit representatives.

    Component indices I in {0..3}^n; u_{k, sigma I} = mu^{h(I)} u_{k, I0} with I0
    the sorted representative, so p_IJ = mu^{h(I) - h(J)} q_{I0 J0}."""

    def __init__(self, n: int):
        self.n = n
        self.size = 4 ** n
        us = u_kets(n)
        self.binoms = binomials(n)
        idx = list(itertools.product(range(4), repeat=n))
        self.indices = idx
        self.reps = sorted({tuple(sorted(I)) for I in idx})
        self.rep_pos = {r: i for i, r in enumerate(self.reps)}
        self.orbit_size = [0] * len(self.reps)
        self.phase = []
        self.rep_of = []
        flat = {I: a for a, I in enumerate(idx)}
        for I in idx:
            r = tuple(sorted(I))
            self.orbit_size[self.rep_pos[r]] += 1
            h = None
            for u in us:
                hk = _mu_ratio(u[flat[I]], u[flat[r]])
                if hk is None or (h is not None and hk != h):
                    raise ArithmeticError(f"orbit phase mismatch at {I}")
                h = hk
            self.phase.append(h)
            self.rep_of.append(self.rep_pos[r])
        self._rep_flat = [flat[r] for r in self.reps]
        self._q = {}
        self._us = us

    def q(self, a: int, b: int) -> AlgebraElement:
        key = (a, b)
        r = self._q.get(key)
        if r is None:
            ia, ib = self._rep_flat[a], self._rep_flat[b]
            r = S7().zero()
            for u, bk in zip(self._us, self.binoms):
                t = u[ia] * u[ib].adjoint()
                r = r + (t if bk == 1 else t * Fraction(1, bk))
            self._q[key] = r
        return r

    def entry(self, i: int, j: int) -> AlgebraElement:
        """p_ij (flat 0-based indices) as an element of A(S^7)."""
        h = self.phase[i] - self.phase[j]
        r = self.q(self.rep_of[i], self.rep_of[j])
        return r * Scalar.mu(h) if h else r

    def entry_s4(self, i: int, j: int) -> AlgebraElement:
        return s7_to_s4(self.entry(i, j))

    def matrix(self) -> list:
        return [[self.entry(i, j) for j in range(self.size)] for i in range(self.size)]

    def trace(self) -> AlgebraElement:
        s = S7().zero()
        for a, N in enumerate(self.orbit_size):
            s = s + self.q(a, a) * N
        return s

    # -- certification ----------------------------------------------------------
    def check_factorization(self, pairs=None) -> bool:
        """Compare entries against the direct sum over k (all pairs by default)."""
        us = self._us
        rng = pairs if pairs is not None else itertools.product(range(self.size), repeat=2)
        for i, j in rng:
            d = S7().zero()
            for u, bk in zip(us, self.binoms):
                d = d + u[i] * u[j].adjoint() * Fraction(1, bk)
            if d != self.entry(i, j):
                return False
        return True

    def check_selfadjoint(self) -> bool:
        R = len(self.reps)
        return all(self.q(a, b).adjoint() == self.q(b, a) for a in range(R) for b in range(a, R))

    def check_idempotent(self) -> bool:
        """p^2 = p  <=>  q N q = q with N the diagonal of orbit sizes."""
        R = len(self.reps)
        for a in range(R):
            for b in range(R):
                s = S7().zero()
                for c in range(R):
                    s = s + self.q(a, c) * self.q(c, b) * self.orbit_size[c]
                if s != self.q(a, b):
                    return False
        return True

    def check_orthogonality(self) -> bool:
        """<u_k|u_l> = binom(n, k-1) delta_kl, which gives p^2 = p by associativity."""
        us = self._us
        P = S7()
        for k in range(len(us)):
            for l in range(k, len(us)):
                want = P.one() * self.binoms[k] if k == l else P.zero()
                if us[k].pair(us[l]) != want:
                    return False
        return True

    def check_coinvariant(self) -> bool:
        from .hopf_galois import coinvariance_check
        R = len(self.reps)
        return all(coinvariance_check(self.q(a, b)) for a in range(R) for b in range(R))

    def apply(self, f: list) -> list:
        """p|f> for a column of S^7 elements."""
        out = []
        for i in range(self.size):
            s = S7().zero()
            for j in range(self.size):
                if not f[j].is_zero():
                    s = s + self.entry(i, j) * f[j]
            out.append(s)
        return out


@lru_cache(maxsize=None)
def projection(n: int) -> ProjectionMatrix:
    if n < 1:
        raise ValueError("n must be >= 1")
    return ProjectionMatrix(n)


def projection_reference() -> list:
    """The 4x4 matrix p_(1) over A(S^4) as displayed in the literature."""
    Q = S4()
    a, b, ab, bb, x = Q.gens("a", "b", "ab", "bb", "x")
    mu = Scalar.mu()
    h = Fraction(1, 2)
    one, zero = Q.one(), Q.zero()
    return [[(one + x) * h, zero, a * h, b * h],
            [zero, (one + x) * h, -(bb * mu) * h, ab * Scalar.mu(-1) * h],
            [ab * h, -(b * Scalar.mu(-1)) * h, (one - x) * h, zero],
            [bb * h, a * mu * h, zero, (one - x) * h]]


def matches_reference() -> bool:
    p = projection(1)
    ref = projection_reference()
    return all(p.entry_s4(i, j) == ref[i][j] for i in range(4) for j in range(4))


@dataclass
class EquivalenceReport:
    u_isometry: bool
    u_tilde_isometry: bool
    v_star_v: bool
    v_v_star: bool

    @property
    def passed(self) -> bool:
        return self.u_isometry and self.u_tilde_isometry and self.v_star_v and self.v_v_star


def _mat_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), S7().zero())
             for j in range(len(B[0]))] for i in range(len(A))]


def _mat_adj(A):
    return [[A[j][i].adjoint() for j in range(len(A))] for i in range(len(A[0]))]


def projection_equivalence_check() -> EquivalenceReport:
    """u = (psi1, psi2), ut = (psit1, psit2); v = ut u^* is a partial isometry
    with v^* v = p and v v^* = pt."""
    P = S7()
    u = [list(r) for r in zip(*psi_kets())]
    ut = [list(r) for r in zip(*psi_tilde_kets())]
    I2 = [[P.one(), P.zero()], [P.zero(), P.one()]]
    p = _mat_mul(u, _mat_adj(u))
    pt = _mat_mul(ut, _mat_adj(ut))
    v = _mat_mul(ut, _mat_adj(u))
    return EquivalenceReport(_mat_mul(_mat_adj(u), u) == I2, _mat_mul(_mat_adj(ut), ut) == I2,
                             _mat_mul(_mat_adj(v), v) == p, _mat_mul(v, _mat_adj(v)) == pt)


def tilde_projection() -> list:
    ut = [list(r) for r in zip(*psi_tilde_kets())]
    return _mat_mul(ut, _mat_adj(ut))


# -- connections -----------------------------------------------------------------------

def ket_pairing_d(bra: KetVector, ket: KetVector, cls=ExteriorForm):
    """<bra|d ket> = sum_j bra_j^* d(ket_j)."""
    s = cls.zero(S7())
    for a, b in zip(bra, ket):
        s = s + cls.from_algebra(a.adjoint()) * cls.differential(b)
    return s


@lru_cache(maxsize=None)
def _grassmann(n: int, cls):
    us = u_kets(n)
    bs = binomials(n)
    N = n + 1
    A = [[None] * N for _ in range(N)]
    for k in range(N):
        for l in range(N):
            f = ket_pairing_d(us[k], us[l], cls)
            b = bs[k] * bs[l]
            A[k][l] = f if b == 1 else f * (Scalar.sqrt(b) * Fraction(1, b))
    return A


def grassmann_connection(n: int, cls=ExteriorForm) -> list:
    """A_kl = <phi_k|d phi_l>."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _grassmann(n, cls)


def _form_vector(f) -> dict:
    c = f.canonical()
    vec = {}
    for w, t in c._w.items():
        for idx, s in element_vector(c.P, t).items():
            vec[(w, idx)] = s
    return vec


def derived_representation(n: int) -> dict:
    """rho'_n(e_ij) in the normalised symmetric basis, for e_ij in gl(2)."""
    N = n + 1
    words = [sym_words(n, k) for k in range(1, N + 1)]
    bs = binomials(n)
    out = {}
    for i in range(2):
        for j in range(2):
            M = [[Scalar(0)] * N for _ in range(N)]
            for k in range(N):
                for l in range(N):
                    c = 0
                    # <u_k| sum_slots e_ij |u_l>
                    for J in words[l]:
                        for s in range(n):
                            if J[s] == j:
                                I = J[:s] + (i,) + J[s + 1:]
                                if I in words[k]:
                                    c += 1
                    if c:
                        b = bs[k] * bs[l]
                        M[k][l] = Scalar(c) if b == 1 else Scalar.sqrt(b) * Fraction(c, b)
            out[(i, j)] = M
    return out


@dataclass
class SU2Report:
    n: int
    solvable: bool
    coefficients: dict          # (k, l) -> (c_H, c_E, c_F)
    matches_rho: bool


def su2_valuedness_check(n: int, cls=ExteriorForm) -> SU2Report:
    """Solve A^(n)_kl = c_H A11 + c_E A12 + c_F A21 entrywise (H = e11 - e22,
    E = e12, F = e21 with A^(1) = A11 H + A12 E + A21 F) and compare the
    coefficient matrices with rho'_n."""
    A1 = grassmann_connection(1, cls)
    basis = {"H": A1[0][0], "E": A1[0][1], "F": A1[1][0]}
    span = LinearSpan()
    for tag, f in basis.items():
        span.add(_form_vector(f), tag)
    A = grassmann_connection(n, cls)
    rho = derived_representation(n)
    rhoH = [[rho[(0, 0)][k][l] - rho[(1, 1)][k][l] for l in range(n + 1)] for k in range(n + 1)]
    # A11 H + A12 E + A21 F with A22 = -A11 requires tracelessness at n = 1
    traceless = (A1[0][0] + A1[1][1]).is_zero()
    coeffs, solvable, match = {}, traceless, traceless
    for k in range(n + 1):
        for l in range(n + 1):
            ok, combo = span.contains(_form_vector(A[k][l]))
            if not ok:
                solvable = match = False
                continue
            c = tuple(LinearSpan._f(combo.get(t, Scalar(0))) for t in ("H", "E", "F"))
            coeffs[(k, l)] = c
            exp = (ScalarFraction(rhoH[k][l]), ScalarFraction(rho[(0, 1)][k][l]),
                   ScalarFraction(rho[(1, 0)][k][l]))
            if any(not (x - y).is_zero() for x, y in zip(c, exp)):
                match = False
    return SU2Report(n, solvable, coeffs, match)


# -- the module isomorphism ---------------------------------------------------------------

class NotCoinvariant(ValueError):
    pass


def _lift_column(f: list) -> list:
    from .hopf_galois import coinvariance_check
    out = []
    for x in f:
        if x.P is S4():
            out.append(s4_to_s7(x))
        else:
            if not coinvariance_check(x):
                raise NotCoinvariant("coefficient is not coinvariant")
            out.append(x)
    return out


def phi_pairings(n: int, f: list) -> list:
    """phi(e_k) = <phi_k|f>."""
    f = _lift_column(f)
    if len(f) != 4 ** n:
        raise ValueError(f"expected a column of length {4 ** n}")
    return [ph.pair(KetVector(f)) for ph in phi_kets(n)]


class ModuleIso:
    """sigma = p|f>  <->  phi: e_k -> <phi_k|f>."""

    def __init__(self, n: int):
        self.n = n
        self.p = projection(n)
        self.phis = phi_kets(n)

    def to_module(self, f: list) -> list:
        return self.p.apply(_lift_column(f))

    def from_section(self, sigma: list) -> list:
        return [ph.pair(KetVector(sigma)) for ph in self.phis]

    def to_section(self, phi: list) -> list:
        out = None
        for ph, c in zip(self.phis, phi):
            t = KetVector([x * c for x in ph])
            out = t if out is None else out + t
        return out.components

    def is_coequivariant(self, phi: list) -> bool:
        """Delta_R(phi(e_k)) = sum_l phi(e_l) (x) e_lk^*."""
        from .hopf_galois import coaction, corepresentation, tensor
        E = corepresentation(self.n).matrix
        for k in range(self.n + 1):
            want = None
            for l in range(self.n + 1):
                t = tensor(phi[l], E[l][k].adjoint())
                want = t if want is None else want + t
            got = coaction(phi[k])
            if not (got == want or (got.is_zero() and want.is_zero())):
                return False
        return True


def module_iso(n: int) -> ModuleIso:
    return ModuleIso(n)
