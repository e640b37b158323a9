"""Chern characters of the instanton projections and the index assembly.

ch_k(p) = (-1)^k (2k)!/k! Tr((p - 1/2)(dp)^{2k}) is computed in the first
order calculus Omega_D over the four-sphere.  The trace is taken on the
orbit-reduced matrix q' = q N (see ProjectionMatrix), which has the same
traces as p.

Entries of q' are graded: q'_ab has torus charge chi_a - chi_b.  Rescaling
X_ab -> mu^f(a,b) X_ab with f(a,b) = beta(chi_a, chi_b) - beta(chi_b, chi_b)
turns every twisted matrix product into a classical one (plain key addition
on packed monomials), and leaves diagonal entries, hence traces, unchanged.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ._forms import _word_phase, partial, word_charge
from .exterior_calculus import ExteriorForm, matrix_product, matrix_trace
from .fibration import S4, S7, phi_kets, projection, psi_kets, s4_to_s7, s7_to_s4
from .first_order_calculus import FirstOrderForm, fo_is_zero_in_quotient
from .nc_algebra import AlgebraElement, clean

MAX_N = {0: 4, 1: 4, 2: 3}


class SizeCapExceeded(ValueError):
    pass


class NoProportionality(ArithmeticError):
    """ch_2(p_(n)) is not a multiple of ch_2(p_(1))."""


def mu_k(k: int) -> int:
    return (-1) ** k * math.factorial(2 * k) // math.factorial(k)


def c_n(n: int) -> Fraction:
    return Fraction(n * (n + 1) * (n + 2), 6)


@dataclass
class ChernValue:
    k: int
    n: int
    form: object            # Scalar-valued AlgebraElement for k = 0, else FirstOrderForm
    normalized: bool = True
    seconds: float = 0.0

    def unnormalized(self) -> "ChernValue":
        if not self.normalized:
            return self
        return ChernValue(self.k, self.n, self.form * Fraction(1, mu_k(self.k)), False,
                          self.seconds)

    def is_zero(self) -> bool:
        return self.form.is_zero()

    def render(self) -> str:
        return self.form.canonical().render() if self.k else self.form.render()


# -- the classical kernel ----------------------------------------------------------

def _grading(P, Q) -> list:
    """chi with charge(Q_ab) = chi_a - chi_b for every term; raises otherwise."""
    R = len(Q)
    chi = [None] * R
    chi[0] = (0,) * P.npairs
    todo = [0]
    while todo:
        a = todo.pop()
        for b in range(R):
            for (i, j) in ((a, b), (b, a)):
                t = Q[i][j]
                if not t:
                    continue
                c = P.charge(next(iter(t)))
                if i == a and chi[b] is None:
                    chi[b] = tuple(x - y for x, y in zip(chi[a], c))
                    todo.append(b)
                elif j == a and chi[b] is None:
                    chi[b] = tuple(x + y for x, y in zip(chi[a], c))
                    todo.append(b)
    for a in range(R):
        if chi[a] is None:
            chi[a] = (0,) * P.npairs
    for a in range(R):
        for b in range(R):
            want = tuple(x - y for x, y in zip(chi[a], chi[b]))
            if any(P.charge(k) != want for k in Q[a][b]):
                raise ArithmeticError(f"entry ({a},{b}) is not homogeneous of charge {want}")
    return chi


class _Kernel:
    """Integer matrices over packed S^4 keys, gauged to classical products."""

    def __init__(self, n: int):
        P = S4()
        self.P = P
        pm = projection(n)
        R = len(pm.reps)
        N = pm.orbit_size
        qp = [[{k: v * N[b] for k, v in s7_to_s4(pm.q(a, b))._t.items()} for b in range(R)]
              for a in range(R)]
        chi = _grading(P, qp)
        self.chi = chi
        L = 1
        for row in qp:
            for t in row:
                for v in t.values():
                    L = L * Fraction(v).denominator // math.gcd(L, Fraction(v).denominator)
        self.L = L
        U = P.MUUNIT
        gauged = []
        for a in range(R):
            row = []
            for b in range(R):
                f = P.beta(chi[a], chi[b]) - P.beta(chi[b], chi[b])
                row.append({k + f * U: int(v * L) for k, v in qp[a][b].items()})
            gauged.append(row)
        one = P.ZERO
        self.qh = [[_lin(gauged[a][b], 2, {one: -L} if a == b else None) for b in range(R)]
                   for a in range(R)]
        self.dq = [[[partial(P, gauged[a][b], g) for b in range(R)] for a in range(R)]
                   for g in range(P.nv)]
        self.R = R

    def mul(self, A: dict, B: dict) -> dict:
        out: dict = {}
        get = out.get
        Z = self.P.ZERO
        for k1, c1 in A.items():
            k1 -= Z
            for k2, c2 in B.items():
                k = k1 + k2
                out[k] = get(k, 0) + c1 * c2
        return self.P.reduce_dict(out)

    def matmul(self, X, Y):
        R = self.R
        out = []
        for i in range(R):
            row = []
            for j in range(R):
                acc: dict = {}
                for l in range(R):
                    if X[i][l] and Y[l][j]:
                        for k, v in self.mul(X[i][l], Y[l][j]).items():
                            acc[k] = acc.get(k, 0) + v
                row.append(clean(acc))
            out.append(row)
        return out

    def trace_product(self, X, Y) -> dict:
        acc: dict = {}
        for i in range(self.R):
            for j in range(self.R):
                if X[i][j] and Y[j][i]:
                    for k, v in self.mul(X[i][j], Y[j][i]).items():
                        acc[k] = acc.get(k, 0) + v
        return clean(acc)

    def trace_form(self, k: int) -> dict:
        """Integer data of Tr((q' - 1/2)(dq')^{2k}) scaled by 2 L^{2k+1}."""
        G = range(self.P.nv)
        out = {}
        if k == 0:
            acc: dict = {}
            for a in range(self.R):
                for kk, v in self.qh[a][a].items():
                    acc[kk] = acc.get(kk, 0) + v
            return {(): clean(acc)}
        if k == 1:
            for g1 in G:
                X = self.matmul(self.qh, self.dq[g1])
                for g2 in G:
                    t = self.trace_product(X, self.dq[g2])
                    if t:
                        out[(g1, g2)] = t
            return out
        M = {}
        for g1 in G:
            X = self.matmul(self.qh, self.dq[g1])
            for g2 in G:
                M[(g1, g2)] = self.matmul(X, self.dq[g2])
        for g3 in G:
            for g4 in G:
                Nm = self.matmul(self.dq[g3], self.dq[g4])
                for w12, Mm in M.items():
                    t = self.trace_product(Mm, Nm)
                    if t:
                        out[w12 + (g3, g4)] = t
        return out


def _lin(t: dict, s: int, extra: dict | None) -> dict:
    out = {k: s * v for k, v in t.items()}
    if extra:
        for k, v in extra.items():
            out[k] = out.get(k, 0) + v
    return clean(out)


@lru_cache(maxsize=None)
def _kernel(n: int) -> _Kernel:
    return _Kernel(n)


@lru_cache(maxsize=None)
def _raw_trace(k: int, n: int) -> FirstOrderForm:
    K = _kernel(n)
    P = K.P
    scale = Fraction(1, 2 * K.L ** (2 * k + 1))
    data = K.trace_form(k)
    w = {}
    for word, t in data.items():
        t = clean({kk: v * scale for kk, v in P.reduce_dict(t).items()})
        if t:
            w[word] = t
    return FirstOrderForm(P, w)


def chern(k: int, n: int, normalized: bool = True) -> ChernValue:
    if k not in MAX_N:
        raise ValueError("k must be 0, 1 or 2")
    if n < 1 or n > MAX_N[k]:
        raise SizeCapExceeded(f"chern({k}, n) supports 1 <= n <= {MAX_N[k]}")
    t0 = time.time()
    if k == 0:
        form = projection(n).trace()
        form = s7_to_s4(form)
    else:
        form = _raw_trace(k, n)
        if normalized:
            form = form * mu_k(k)
    return ChernValue(k, n, form, normalized or k == 0, time.time() - t0)


def naive_trace(k: int, n: int) -> FirstOrderForm:
    """Tr((p - 1/2)(dp)^{2k}) on the full 4^n x 4^n matrix (slow reference)."""
    pm = projection(n)
    size = pm.size
    p = [[FirstOrderForm.from_algebra(pm.entry_s4(i, j)) for j in range(size)]
         for i in range(size)]
    dp = [[x.d() for x in row] for row in p]
    half = Fraction(1, 2)
    X = [[p[i][j] - (half if i == j else 0) for j in range(size)] for i in range(size)]
    for _ in range(2 * k):
        X = matrix_product(X, dp)
    return matrix_trace(X)


# -- Omega_D(S^4) inside Omega_D(S^7) -------------------------------------------------

@lru_cache(maxsize=None)
def _pullback_gen(g: int) -> dict:
    """Classical pullback of an S^4 generator: S^7 monomial keys with the
    mu field stripped (the phases are the torus phases of the split)."""
    P4, P7 = S4(), S7()
    t = s4_to_s7(P4.gen(P4.names[g]))._t
    mask = P7.MONOMASK
    out: dict = {}
    for k, v in t.items():
        m = k & mask
        out[m] = out.get(m, 0) + v
    return clean(out)


def _cl_mul(A: dict, B: dict) -> dict:
    out: dict = {}
    for k1, c1 in A.items():
        for k2, c2 in B.items():
            k = k1 + k2
            out[k] = out.get(k, 0) + c1 * c2
    return clean(out)


@lru_cache(maxsize=None)
def _pullback_mono(m: int) -> dict:
    P4 = S4()
    out = {0: 1}
    for g, e in enumerate(P4.exps(m)):
        for _ in range(e):
            out = _cl_mul(out, _pullback_gen(g))
    return out


@lru_cache(maxsize=None)
def _pullback_word(word: tuple) -> dict:
    """{S^7 word: {classical key: int}} of d(g_1) ... d(g_p) pulled back."""
    P7 = S7()
    out = {(): {0: 1}}
    for g in word:
        dg = {}
        for h in range(P7.nv):
            t = partial(P7, _pullback_gen(g), h)
            if t:
                dg[h] = t
        nxt: dict = {}
        for w, t in out.items():
            for h, th in dg.items():
                d = nxt.setdefault(w + (h,), {})
                for k, v in _cl_mul(t, th).items():
                    d[k] = d.get(k, 0) + v
        out = {w: clean(t) for w, t in nxt.items() if clean(t)}
    return out


def lift_to_s7(w: FirstOrderForm) -> FirstOrderForm:
    """The injective map Omega_D(S^4) -> Omega_D(S^7) induced by the inclusion.

    On split representatives it is the classical pullback on the classical
    leg and the identity on torus words; S^7 keys carry no ordering phase,
    so a term's mu exponent just gains the S^4 torus phase of its charge."""
    from .splitting_hodge import torus_word
    P4, P7 = S4(), S7()
    L = 1
    for t in w._w.values():
        for v in t.values():
            den = Fraction(v).denominator
            L = L * den // math.gcd(L, den)
    out: dict = {}
    U7 = P7.MUUNIT
    for word, t in w._w.items():
        cw = word_charge(P4, word)
        pw = _pullback_word(word)
        for k, v in t.items():
            m = k & P4.MONOMASK
            mu, d, e = P4.scalar_fields(k)
            if d != 1 or e:
                raise ArithmeticError("lift expects rational mu-polynomial coefficients")
            c = tuple(x + y for x, y in zip(cw, P4.charge(m)))
            shift = (mu + torus_word(P4, c)[0]) * U7 + P7.ZERO
            iv = int(v * L)
            pm = _pullback_mono(m)
            for w7, tw in pw.items():
                dd = out.setdefault(w7, {})
                for k1, c1 in tw.items():
                    for k2, c2 in pm.items():
                        kk = k1 + k2 + shift
                        dd[kk] = dd.get(kk, 0) + iv * c1 * c2
    res = {}
    for w7, t in out.items():
        t = P7.reduce_dict(clean(t))
        t = {k: Fraction(v, L) for k, v in t.items() if v}
        if t:
            res[w7] = t
    return FirstOrderForm(P7, res)


def lift_to_s7_slow(w: FirstOrderForm) -> FirstOrderForm:
    """Reference lift by twisted products of lifted differentials."""
    P4, P7 = S4(), S7()
    total = FirstOrderForm.zero(P7)
    for word, t in w._w.items():
        lifted_word = FirstOrderForm.from_algebra(P7.one())
        for g in word:
            lifted_word = lifted_word * FirstOrderForm.differential(
                s4_to_s7(P4.gen(P4.names[g])))
        cw = word_charge(P4, word)
        ph = _word_phase(P4, word)
        coeff = {}
        for kk, v in t.items():
            # [w, m] = mu^(-phi(w) - beta(c(w), c(m))) (dg_1 ... dg_p) [m]
            s = -ph - P4.beta(cw, P4.charge(kk))
            k2 = kk + s * P4.MUUNIT
            coeff[k2] = coeff.get(k2, 0) + v
        total = total + lifted_word * s4_to_s7(AlgebraElement(P4, clean(coeff)))
    return total


# -- the phi-pairing path -------------------------------------------------------------

def _fo_column(col) -> list:
    return [FirstOrderForm.from_algebra(x) for x in col]


def _pair(bra: list, ket: list) -> FirstOrderForm:
    s = None
    for x, y in zip(bra, ket):
        t = x.adjoint() * y
        s = t if s is None else s + t
    return s


@lru_cache(maxsize=None)
def gauge_matrices(n: int):
    """A_kl = <phi_k|d phi_l> and B_kl = <d phi_k|d phi_l> in Omega_D(S^7)."""
    if n == 0:
        kets = psi_kets()
        cols = [_fo_column(list(k)) for k in kets]
    else:
        cols = [_fo_column(list(k)) for k in phi_kets(n)]
    dcols = [[x.d() for x in c] for c in cols]
    A = [[_pair(ck, dl) for dl in dcols] for ck in cols]
    B = [[_pair(dk, dl) for dl in dcols] for dk in dcols]
    return A, B


def _psi_matrices():
    kets = psi_kets()
    cols = [_fo_column(list(k)) for k in kets]
    dcols = [[x.d() for x in c] for c in cols]
    return [[_pair(ck, dl) for dl in dcols] for ck in cols]


def _tr_power(A, p: int):
    X = A
    for _ in range(p - 1):
        X = matrix_product(X, A)
    return matrix_trace(X)


def chern2_formula(n: int) -> FirstOrderForm:
    """1/2 sum { d(AAA) + BAA + BB + d(BA) } traced over k, l, m.

    Omega_D is not closed under d on forms of positive degree (d of a first
    order relation is a second order one), so d is expanded by the Leibniz
    rule on the defining expressions: dA = B, dB = 0, hence
    d(AAA) = BAA - ABA + AAB and d(BA) = BB."""
    A, B = gauge_matrices(n)
    AA = matrix_product(A, A)
    BA = matrix_product(B, A)
    BAA = matrix_trace(matrix_product(BA, A))
    ABA = matrix_trace(matrix_product(A, BA))
    AAB = matrix_trace(matrix_product(AA, B))
    BB = matrix_trace(matrix_product(B, B))
    return (BAA - ABA + AAB + BAA + BB + BB) * Fraction(1, 2)


@dataclass
class TwoPathsReport:
    """Trace path Tr((p - 1/2)(dp)^4), lifted to the seven-sphere, against the
    bracket formula in the gauge matrices A and B."""
    n: int
    omega_d_equal: bool
    exterior_equal: bool
    residual_terms: int
    seconds: float

    @property
    def passed(self) -> bool:
        return self.omega_d_equal


def chern_two_paths_report(n: int) -> TwoPathsReport:
    if n < 1 or n > 3:
        raise SizeCapExceeded("two-paths check supports 1 <= n <= 3")
    t0 = time.time()
    trace_path = lift_to_s7(chern(2, n, normalized=False).form.canonical())
    formula = chern2_formula(n)
    diff = (trace_path - formula).canonical()
    ext = (to_exterior(trace_path) - to_exterior(formula)).canonical()
    return TwoPathsReport(n, diff.is_raw_zero(), ext.is_raw_zero(),
                          sum(len(t) for t in diff._w.values()), time.time() - t0)


def chern_two_paths_check(n: int) -> bool:
    return chern_two_paths_report(n).passed


# -- Lemma on the gauge sums -------------------------------------------------------------

@dataclass
class LemmaReport:
    n: int
    coefficient: Fraction
    double_ok: bool
    triple_ok: bool

    @property
    def passed(self) -> bool:
        return self.double_ok and self.triple_ok


def lemma_techn_report(n: int) -> LemmaReport:
    if n < 1 or n > 3:
        raise SizeCapExceeded("lemma check supports 1 <= n <= 3")
    A, _ = gauge_matrices(n)
    A1 = _psi_matrices()
    c = c_n(n)
    ok = []
    for p in (2, 3):
        lhs = _tr_power(A, p)
        rhs = _tr_power(A1, p) * c
        ok.append(fo_is_zero_in_quotient(lhs - rhs).verdict == "zero")
    return LemmaReport(n, c, ok[0], ok[1])


def lemma_techn_check(n: int) -> bool:
    return lemma_techn_report(n).passed


# -- proportionality ---------------------------------------------------------------------

def _solve_ratio(x, y) -> Fraction:
    """c with x = c y for canonical forms, or raise NoProportionality."""
    xc, yc = x.canonical(), y.canonical()
    if yc.is_raw_zero():
        raise NoProportionality("reference form is zero")
    word, t = next(iter(yc._w.items()))
    key, v = next(iter(t.items()))
    c = Fraction(xc._w.get(word, {}).get(key, 0)) / Fraction(v)
    if not (xc - yc * c).canonical().is_raw_zero():
        raise NoProportionality(f"no c with ch2(p_n) = c ch2(p_1); trial c = {c}")
    return c


def to_exterior(w: FirstOrderForm) -> ExteriorForm:
    """Quotient map Omega_D -> Omega (antisymmetrize the classical letters)."""
    from ._forms import sort_word
    out: dict = {}
    for word, t in w._w.items():
        sw, s = sort_word(word)
        if sw is None:
            continue
        d = out.setdefault(sw, {})
        for k, v in t.items():
            d[k] = d.get(k, 0) + s * v
    return ExteriorForm(w.P, {ww: clean(t) for ww, t in out.items() if clean(t)})


def proportionality(n: int) -> Fraction:
    """c_n with ch2(p_n) = c_n ch2(p_1) in Omega_D^4(S^4)."""
    return _solve_ratio(chern(2, n).form, chern(2, 1).form)


def proportionality_exterior(n: int) -> Fraction:
    """The same relation after passing to the exterior calculus Omega(S^4)."""
    return _solve_ratio(to_exterior(chern(2, n).form), to_exterior(chern(2, 1).form))


@dataclass
class CliffordReport:
    n: int
    samples: int
    seed: int
    max_residual: float         # |pi_D(ch2(p_n)) - c_n pi_D(ch2(p_1))|
    gamma_coefficient: complex  # pi_D(ch2(p_1)) = g * gamma (unnormalized trace)
    off_gamma: float            # size of the part of pi_D(ch2(p_1)) not along gamma
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol and self.off_gamma <= self.tol


def clifford_proportionality(n: int, samples: int = 5, seed: int = 0,
                             tol: float = 1e-9) -> CliffordReport:
    """Pointwise check of pi_D(ch2(p_n)) = c_n pi_D(ch2(p_1)) in the Clifford
    image (torus words kept separate)."""
    import numpy as np
    from .splitting_hodge import chirality, clifford_image_at, frame_at, random_points, split
    fn = split(chern(2, n, normalized=False).form)
    f1 = split(chern(2, 1, normalized=False).form)
    g5 = chirality()
    c = float(c_n(n))
    worst, off, coeff = 0.0, 0.0, None
    for pt in random_points(S4(), samples, seed):
        fr = frame_at(S4(), pt)
        a = clifford_image_at(fn, pt, fr)
        b = clifford_image_at(f1, pt, fr)
        zero = np.zeros((4, 4))
        for w in set(a) | set(b):
            worst = max(worst, float(np.abs(a.get(w, zero) - c * b.get(w, zero)).max()))
        M = b.get((0, 0), zero)
        g = np.trace(g5 @ M) / 4
        off = max(off, float(np.abs(M - g * g5).max()),
                  max((float(np.abs(v).max()) for w, v in b.items() if w != (0, 0)), default=0.0))
        coeff = g if coeff is None else coeff
    return CliffordReport(n, samples, seed, worst, complex(np.round(coeff, 12)), off, tol)


# -- index -------------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexConstants:
    gamma_pairing: int = 3                                  # pi_D(ch2(p_1)) = 3 gamma
    dixmier_m4: Fraction = Fraction(1, 3)                   # Tr_w |D|^-4 = 8/4!
    ind_D_plain: int = 0                                    # first Pontrjagin class of S^4
    cocycle_prefactor: Fraction = Fraction(1, 24) * Fraction(24, 2)
    residue_to_dixmier: int = 2                             # res = 2 Tr_w for m = 4


CONSTANTS = IndexConstants()


def index(n: int, c: Fraction | None = None, constants: IndexConstants = CONSTANTS) -> int:
    """Ind D_p(n) = prefactor * c_n * (gamma pairing * residue of |D|^-4) + Ind D."""
    if c is None:
        c = c_n(n)
    k = constants
    residue = k.residue_to_dixmier * k.dixmier_m4
    value = k.cocycle_prefactor * Fraction(c) * k.gamma_pairing * residue + k.ind_D_plain
    if value.denominator != 1:
        raise ArithmeticError(f"non-integral index {value}")
    return int(value)
