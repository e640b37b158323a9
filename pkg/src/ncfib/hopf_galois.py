"""The SU(2) Hopf algebra, its coaction on the 7-sphere, the canonical map,
the strong connection l and its connection one-form."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .nc_algebra import (AlgebraElement, LinearSpan, Presentation, _compositions, add_into,
                         clean, element_vector, mul_dicts, preset, render_mono)
from .scalars import Scalar


# -- tensors ----------------------------------------------------------------------

def _bare(Q: Presentation, k: int) -> tuple[int, tuple]:
    return k & Q.MONOMASK, Q.scalar_fields(k)


class Tensor:
    """Element of A_1 (x) ... (x) A_r.  Stored as {(m_2, ..., m_r): {k_1: c}}:
    legs 2..r hold bare split monomials, all scalars live on the first leg."""

    __slots__ = ("legs", "_d")

    def __init__(self, legs: tuple, d: dict):
        self.legs = tuple(legs)
        self._d = d

    @classmethod
    def from_legs(cls, legs, dicts) -> "Tensor":
        """Tensor product of term dicts, one per leg."""
        P1 = legs[0]
        combos = [((), dict(dicts[0]))]
        for Q, t in zip(legs[1:], dicts[1:]):
            new = []
            for rest, t1 in combos:
                for k, v in t.items():
                    m, (mu, d, e) = _bare(Q, k)
                    s = {P1.scalar_key(mu, d, e): Fraction(v)}
                    new.append((rest + (m,), mul_dicts(P1, t1, s, reduce=False)))
            combos = new
        out: dict = {}
        for rest, t1 in combos:
            add_into(out.setdefault(rest, {}), t1)
        return cls(legs, _clean_d(out))

    @classmethod
    def simple(cls, *elems) -> "Tensor":
        return cls.from_legs(tuple(e.P for e in elems), [e._t for e in elems])

    @classmethod
    def zero(cls, legs) -> "Tensor":
        return cls(tuple(legs), {})

    def _chk(self, o):
        if not isinstance(o, Tensor) or o.legs != self.legs:
            raise ValueError("tensor leg mismatch")
        return o

    def __add__(self, o):
        if isinstance(o, int) and o == 0:
            return self
        o = self._chk(o)
        out = {r: dict(t) for r, t in self._d.items()}
        for r, t in o._d.items():
            add_into(out.setdefault(r, {}), t)
        return Tensor(self.legs, _clean_d(out))

    __radd__ = __add__

    def __neg__(self):
        return Tensor(self.legs, {r: {k: -v for k, v in t.items()} for r, t in self._d.items()})

    def __sub__(self, o):
        return self + (-self._chk(o))

    def scale(self, s) -> "Tensor":
        P1 = self.legs[0]
        if isinstance(s, (int, Fraction)):
            return Tensor(self.legs, _clean_d({r: {k: v * s for k, v in t.items()}
                                               for r, t in self._d.items()}))
        st = AlgebraElement(P1, {}) + s
        return Tensor(self.legs, _clean_d({r: mul_dicts(P1, t, st._t, reduce=False)
                                           for r, t in self._d.items()}))

    def __mul__(self, o):
        if isinstance(o, (int, Fraction, Scalar)):
            return self.scale(o)
        o = self._chk(o)
        P1 = self.legs[0]
        out: dict = {}
        for ra, ta in self._d.items():
            for rb, tb in o._d.items():
                t1 = mul_dicts(P1, ta, tb)
                if not t1:
                    continue
                parts = [((), t1)]
                for Q, ma, mb in zip(self.legs[1:], ra, rb):
                    prod = mul_dicts(Q, {Q.ZERO + ma: Fraction(1)}, {Q.ZERO + mb: Fraction(1)})
                    new = []
                    for rest, t in parts:
                        for k, v in prod.items():
                            m, (mu, d, e) = _bare(Q, k)
                            s = {P1.scalar_key(mu, d, e): Fraction(v)}
                            new.append((rest + (m,), mul_dicts(P1, t, s, reduce=False)))
                    parts = new
                for rest, t in parts:
                    add_into(out.setdefault(rest, {}), t)
        return Tensor(self.legs, _clean_d(out))

    def __eq__(self, o):
        if isinstance(o, int) and o == 0:
            return not self._d
        return isinstance(o, Tensor) and self.legs == o.legs and self._d == o._d

    def __hash__(self):
        return hash(frozenset((r, frozenset(t.items())) for r, t in self._d.items()))

    def is_zero(self) -> bool:
        return not self._d

    def items(self):
        """Yield (first-leg element, tuple of bare split elements of the other legs)."""
        for rest, t in self._d.items():
            yield (AlgebraElement(self.legs[0], dict(t)),
                   tuple(AlgebraElement(Q, {Q.ZERO + m: Fraction(1)})
                         for Q, m in zip(self.legs[1:], rest)))

    def map_leg(self, i: int, fn) -> "Tensor":
        """Apply a linear map (AlgebraElement -> Tensor or AlgebraElement) to leg i."""
        out = None
        for first, rest in self.items():
            elems = [first] + list(rest)
            img = fn(elems[i])
            if isinstance(img, AlgebraElement):
                img = Tensor.simple(img)
            if img.is_zero():
                continue
            for f2, r2 in img.items():
                new_elems = elems[:i] + [f2] + list(r2) + elems[i + 1:]
                t = Tensor.from_legs(tuple(e.P for e in new_elems), [e._t for e in new_elems])
                out = t if out is None else out + t
        if out is None:
            # zero tensor; the image legs are unknown, so keep the source legs
            return Tensor(self.legs, {})
        return out

    def permute(self, order) -> "Tensor":
        out = None
        for first, rest in self.items():
            elems = [first] + list(rest)
            ne = [elems[j] for j in order]
            t = Tensor.from_legs(tuple(e.P for e in ne), [e._t for e in ne])
            out = t if out is None else out + t
        return out if out is not None else Tensor(tuple(self.legs[j] for j in order), {})

    def multiply_legs(self) -> AlgebraElement:
        """m(a (x) b) = ab for two legs over the same algebra."""
        if len(self.legs) != 2 or self.legs[0] is not self.legs[1]:
            raise ValueError("multiply_legs needs two equal legs")
        P = self.legs[0]
        out: dict = {}
        for rest, t in self._d.items():
            add_into(out, mul_dicts(P, t, {P.ZERO + rest[0]: Fraction(1)}))
        return AlgebraElement(P, clean(out))

    def left_mul(self, a: AlgebraElement) -> "Tensor":
        ones = [Q.one() for Q in self.legs[1:]]
        return Tensor.simple(a, *ones) * self

    def right_mul_last(self, b: AlgebraElement) -> "Tensor":
        ones = [Q.one() for Q in self.legs[:-1]]
        return self * Tensor.simple(*ones, b)

    def render(self) -> str:
        """Right legs shown as ordered monomials, all scalars on the first leg."""
        if not self._d:
            return "0"
        rows = []
        for first, rest in self.items():
            ph = 0
            names = []
            for x in rest:
                (ex, _), = x.split_items()
                ph += x.P.ordered_phase(ex)
                names.append(render_mono(x.P, ex) or "1")
            if ph:
                first = first * Scalar.mu(-ph)
            rows.append((names, first))
        rows.sort(key=lambda r: r[0])
        out = ""
        for names, first in rows:
            f = first.render()
            neg = f.startswith("-") and len(first) == 1
            if neg:
                f = f[1:]
            if len(first) > 1:
                f = f"({f})"
            term = f"{f} (x) " + " (x) ".join(names)
            if not out:
                out = ("-" if neg else "") + term
            else:
                out += (" - " if neg else " + ") + term
        return out

    __str__ = render

    def __repr__(self):
        return f"<Tensor {self.render()}>"


def _clean_d(d: dict) -> dict:
    out = {}
    for r, t in d.items():
        t = clean(t)
        if t:
            out[r] = t
    return out


def tensor(*elems) -> Tensor:
    return Tensor.simple(*elems)


# -- the Hopf algebra A(SU(2)) ---------------------------------------------------------

def H() -> Presentation:
    return preset("su2")


def fundamental() -> list:
    """M = [[w1, w2], [-wb2, wb1]]."""
    h = H()
    w1, w2, wb1, wb2 = h.gens("w1", "w2", "wb1", "wb2")
    return [[w1, w2], [-wb2, wb1]]


_GEN_MATRIX_POS = {"w1": (0, 0, 1), "w2": (0, 1, 1), "wb2": (1, 0, -1), "wb1": (1, 1, 1)}


def _gen_image(name: str, fn):
    i, j, s = _GEN_MATRIX_POS[name]
    r = fn(i, j)
    return r.scale(s) if isinstance(r, Tensor) else r * s


def _hom_on_monomials(Pn: Presentation, gen_image, cache: dict):
    """Extend generator images multiplicatively to split monomials [m]."""
    def img_mono(m: int):
        r = cache.get(m)
        if r is not None:
            return r
        ex = Pn.exps(m)
        r = None
        for g, e in enumerate(ex):
            for _ in range(e):
                x = gen_image(Pn.names[g])
                r = x if r is None else r * x
        if r is None:
            r = gen_image(None)
        ph = Pn.ordered_phase(ex)
        if ph:
            r = r * Scalar.mu(-ph)
        cache[m] = r
        return r

    def apply(a: AlgebraElement):
        out = None
        for k, v in a._t.items():
            m = k & Pn.MONOMASK
            mu, d, e = Pn.scalar_fields(k)
            s = Scalar._raw({(mu, d, e): Fraction(v)})
            t = img_mono(m) * s
            out = t if out is None else out + t
        return out
    return apply


_cop_cache: dict = {}


def _cop_gen(name):
    h = H()
    if name is None:
        return tensor(h.one(), h.one())
    M = fundamental()
    def f(i, j):
        return tensor(M[i][0], M[0][j]) + tensor(M[i][1], M[1][j])
    return _gen_image(name, f)


def coproduct(h: AlgebraElement) -> Tensor:
    """Delta on A(SU(2)); Delta(M_ij) = sum_k M_ik (x) M_kj."""
    if h.is_zero():
        return Tensor.zero((H(), H()))
    return _hom_on_monomials(H(), _cop_gen, _cop_cache)(h)


def counit(h: AlgebraElement) -> Scalar:
    """epsilon(w1) = epsilon(wb1) = 1, epsilon(w2) = epsilon(wb2) = 0."""
    hp = H()
    acc = Scalar(0)
    for k, v in h._t.items():
        ex = hp.exps(k & hp.MONOMASK)
        if ex[1] or ex[3]:
            continue
        mu, d, e = hp.scalar_fields(k)
        acc = acc + Scalar._raw({(mu, d, e): Fraction(v)})
    return acc


def antipode(h: AlgebraElement) -> AlgebraElement:
    """S(M) = M^* entrywise transposed: S(w1) = wb1, S(w2) = -w2 (anti-morphism,
    here a morphism because H is commutative)."""
    hp = H()
    imgs = {"w1": hp.gen("wb1"), "wb1": hp.gen("w1"), "w2": -hp.gen("w2"), "wb2": -hp.gen("wb2")}
    out = hp.zero()
    for k, v in h._t.items():
        ex = hp.exps(k & hp.MONOMASK)
        mu, d, e = hp.scalar_fields(k)
        t = hp.one() * Scalar._raw({(mu, d, e): Fraction(v)})
        for g, eg in enumerate(ex):
            for _ in range(eg):
                t = t * imgs[hp.names[g]]
        out = out + t
    return out


def r_basis(k: int, m: int, n: int) -> AlgebraElement:
    """r^{kmn} = (-1)^n w1^k w2^m wb2^n (k >= 0), (-1)^n w2^m wb2^n wb1^{-k} (k < 0)."""
    hp = H()
    ex = [max(k, 0), m, max(-k, 0), n]
    return hp.monomial(ex, (-1) ** n)


def r_expand(h: AlgebraElement) -> dict:
    """Coefficients of h in the r-basis: {(k, m, n): Scalar}."""
    out = {}
    for ex, s in h.terms.items():
        a, m, b, n = ex
        if a and b:
            raise ValueError("element not in normal form")
        k = a if a else -b
        out[(k, m, n)] = out.get((k, m, n), Scalar(0)) + s * ((-1) ** n)
    return {key: s for key, s in out.items() if not s.is_zero()}


# -- coaction on the 7-sphere -------------------------------------------------------------

def P7() -> Presentation:
    return preset("s7")


_coact_cache: dict = {}

# block structure: Delta_R(z^i) = sum_a z^a (x) M_ai with M block diagonal
_BLOCK = {0: (0, 0), 1: (0, 1), 2: (1, 0), 3: (1, 1)}  # generator -> (block, index in block)


def _coact_gen(name):
    P, hp = P7(), H()
    if name is None:
        return tensor(P.one(), hp.one())
    M = fundamental()
    bar = name.startswith("zb")
    i = int(name[-1]) - 1
    blk, j = _BLOCK[i]
    out = None
    for a in range(2):
        za = P.gen(("zb" if bar else "z") + str(2 * blk + a + 1))
        h = M[a][j].adjoint() if bar else M[a][j]
        t = tensor(za, h)
        out = t if out is None else out + t
    return out


def coaction(p: AlgebraElement) -> Tensor:
    """Delta_R: P -> P (x) H."""
    if p.is_zero():
        return Tensor.zero((P7(), H()))
    return _hom_on_monomials(P7(), _coact_gen, _coact_cache)(p)


def coinvariance_check(p: AlgebraElement) -> bool:
    return coaction(p) == tensor(p, H().one())


def left_coaction(p: AlgebraElement) -> Tensor:
    """Delta_L(p) = S^{-1}(p_(1)) (x) p_(0), with S^{-1} = S."""
    return coaction(p).map_leg(1, antipode).permute((1, 0)) if not p.is_zero() else \
        Tensor.zero((H(), P7()))


# -- corepresentations -----------------------------------------------------------------------

def _sym_words(n: int, k: int):
    """Distinct words with n-k+1 ones and k-1 twos (0-based letters 0/1)."""
    return sorted(set(itertools.permutations([0] * (n - k + 1) + [1] * (k - 1))))


def _inv_sqrt(b: int) -> Scalar:
    return Scalar.sqrt(b) * Fraction(1, b)


@dataclass
class Corepresentation:
    n: int
    matrix: list

    def comodule_axioms(self) -> dict:
        N = self.n + 1
        E = self.matrix
        hp = H()
        cop = all(coproduct(E[k][l]) == sum((tensor(E[k][m], E[m][l]) for m in range(N)),
                                            Tensor.zero((hp, hp)))
                  for k in range(N) for l in range(N))
        eps = all(counit(E[k][l]) == Scalar(1 if k == l else 0) for k in range(N) for l in range(N))
        anti = all(sum((antipode(E[k][m]) * E[m][l] for m in range(N)), hp.zero())
                   == (hp.one() if k == l else hp.zero()) for k in range(N) for l in range(N))
        return {"coproduct": cop, "counit": eps, "antipode": anti}


def corepresentation(n: int) -> Corepresentation:
    """n-th symmetric power of M in the a_k-normalised basis."""
    if n < 1:
        raise ValueError("n must be >= 1")
    M = fundamental()
    hp = H()
    N = n + 1
    us = [_sym_words(n, k) for k in range(1, N + 1)]
    E = [[hp.zero() for _ in range(N)] for _ in range(N)]
    for k in range(N):
        for l in range(N):
            s = hp.zero()
            for I in us[k]:
                for J in us[l]:
                    t = hp.one()
                    for a, b in zip(I, J):
                        t = t * M[a][b]
                    s = s + t
            b = len(us[k]) * len(us[l])
            E[k][l] = s * _inv_sqrt(b) if b > 1 else s
    return Corepresentation(n, E)


# -- canonical map ---------------------------------------------------------------------------

def chi_bar(t: Tensor) -> Tensor:
    """p' (x) p -> p' p_(0) (x) p_(1) on P (x) P."""
    P, hp = P7(), H()
    out = Tensor.zero((P, hp))
    for first, (second,) in t.items():
        out = out + coaction(second).left_mul(first)
    return out


canonical_map = chi_bar


def ket_tensor(i: int, j: int) -> Tensor:
    """sum_c <psi_i|_c (x) |psi_j>_c."""
    from .fibration import psi_kets
    psi = psi_kets()
    return sum((tensor(psi[i][c].adjoint(), psi[j][c]) for c in range(4)),
               Tensor.zero((P7(), P7())))


def galois_witnesses() -> dict:
    hp = H()
    targets = {(0, 0): hp.gen("w1"), (0, 1): hp.gen("w2"), (1, 0): -hp.gen("wb2"),
               (1, 1): hp.gen("wb1")}
    out = {}
    for (i, j), h in targets.items():
        img = chi_bar(ket_tensor(i, j))
        out[(i, j)] = (img, img == tensor(P7().one(), h))
    return out


# -- strong connection ------------------------------------------------------------------------

_ELL: dict = {}


def _sandwich(t: Tensor, pairs) -> Tensor:
    P = P7()
    out = Tensor.zero((P, P))
    for sgn, a, b in pairs:
        left, right = P.gen(a), P.gen(b)
        out = out + tensor(left, P.one()) * t * tensor(P.one(), right) * sgn
    return out


_RULES = {
    "k+": [(1, "zb1", "z1"), (1, "z2", "zb2"), (1, "zb3", "z3"), (1, "z4", "zb4")],
    "k-": [(1, "zb2", "z2"), (1, "z1", "zb1"), (1, "zb4", "z4"), (1, "z3", "zb3")],
    "m+": [(1, "zb1", "z2"), (-1, "z2", "zb1"), (1, "zb3", "z4"), (-1, "z4", "zb3")],
    "n+": [(1, "zb2", "z1"), (-1, "z1", "zb2"), (1, "zb4", "z3"), (-1, "z3", "zb4")],
}


class EllValidationError(RuntimeError):
    pass


def ell_basis(k: int, m: int, n: int, validate: bool = True) -> Tensor:
    """l(r^{kmn}) by the four sandwich rules, memoised; each value is checked
    against chi_bar(l(h)) = 1 (x) h before it is cached."""
    key = (k, m, n)
    t = _ELL.get(key)
    if t is not None:
        return t
    P = P7()
    if key == (0, 0, 0):
        t = tensor(P.one(), P.one())
    elif n > 0:
        t = _sandwich(ell_basis(k, m, n - 1, validate), _RULES["n+"])
    elif m > 0:
        t = _sandwich(ell_basis(k, m - 1, 0, validate), _RULES["m+"])
    elif k > 0:
        t = _sandwich(ell_basis(k - 1, 0, 0, validate), _RULES["k+"])
    else:
        t = _sandwich(ell_basis(k + 1, 0, 0, validate), _RULES["k-"])
    if validate and chi_bar(t) != tensor(P.one(), r_basis(k, m, n)):
        raise EllValidationError(f"l(r^{key}) fails chi_bar(l(h)) = 1 (x) h")
    _ELL[key] = t
    return t


def ell_recursive(h: AlgebraElement) -> Tensor:
    P = P7()
    out = Tensor.zero((P, P))
    for key, s in r_expand(h).items():
        out = out + ell_basis(*key).scale(s)
    return out


# Peter-Weyl variant: l(e^{(n)}_kl) = sum_I <phi_k|_I (x) |phi_l>_I on matrix
# coefficients, which is bicolinear by construction.

_PW: dict = {}


@lru_cache(maxsize=None)
def _pw_span(D: int) -> LinearSpan:
    span = LinearSpan()
    span.add(element_vector(H(), H().one()._t), (0, 0, 0))
    for n in range(1, D + 1):
        E = corepresentation(n).matrix
        for k in range(n + 1):
            for l in range(n + 1):
                span.add(element_vector(H(), E[k][l]._t), (n, k, l))
    return span


def ell_matrix_coefficient(n: int, k: int, l: int) -> Tensor:
    key = (n, k, l)
    t = _PW.get(key)
    if t is None:
        P = P7()
        if n == 0:
            t = tensor(P.one(), P.one())
        else:
            from .fibration import phi_kets
            phis = phi_kets(n)
            t = Tensor.zero((P, P))
            for a, b in zip(phis[k], phis[l]):
                t = t + tensor(a.adjoint(), b)
        _PW[key] = t
    return t


def ell_peter_weyl(h: AlgebraElement) -> Tensor:
    P = P7()
    out = Tensor.zero((P, P))
    if h.is_zero():
        return out
    D = max(H().degree(k) for k in h._t)
    ok, combo = _pw_span(D).contains(element_vector(H(), h._t))
    if not ok:
        raise ArithmeticError("matrix coefficients do not span")
    for key, c in combo.items():
        out = out + ell_matrix_coefficient(*key).scale(LinearSpan._f(c).as_scalar())
    return out


ELL_METHODS = {"recursive": ell_recursive, "peter_weyl": ell_peter_weyl}


def ell(h: AlgebraElement, method: str = "recursive") -> Tensor:
    """The strong connection l: H -> P (x) P."""
    return ELL_METHODS[method](h)


def omega(h: AlgebraElement, method: str = "recursive") -> Tensor:
    """l(h) - eps(h) 1 (x) 1, an element of the universal one-forms ker m."""
    P = P7()
    return ell(h, method) - tensor(P.one(), P.one()).scale(counit(h))


def delta_un(p: AlgebraElement) -> Tensor:
    P = p.P
    return tensor(P.one(), p) - tensor(p, P.one())


def in_omega_B_P(t: Tensor) -> tuple[bool, str]:
    """t in (Omega^1_un B) P  <=>  m(t) = 0 and every left coefficient (w.r.t.
    the monomial basis of the right leg) is coinvariant.  Then
    t = -sum_j d(L_j) m_j is an explicit certificate."""
    if not t.multiply_legs().is_zero():
        return False, "m(t) != 0"
    for first, (second,) in t.items():
        if not coinvariance_check(first):
            return False, f"left coefficient of {second.render()} not coinvariant"
    # certificate recombination
    cert = Tensor.zero(t.legs)
    for first, (second,) in t.items():
        cert = cert - delta_un(first) * tensor(P7().one(), second)
    return cert == t, "certificate recombines" if cert == t else "certificate mismatch"


def in_P_omega_B(t: Tensor) -> tuple[bool, str]:
    """t in P (Omega^1_un B): same test with the legs exchanged."""
    if not t.multiply_legs().is_zero():
        return False, "m(t) != 0"
    sw = t.permute((1, 0))
    for first, (second,) in sw.items():
        if not coinvariance_check(first):
            return False, f"right coefficient of {second.render()} not coinvariant"
    cert = Tensor.zero(t.legs)
    for first, (second,) in sw.items():
        cert = cert + tensor(second, P7().one()) * delta_un(first)
    return cert == t, "certificate recombines" if cert == t else "certificate mismatch"


def r_indices(max_degree: int):
    for k in range(-max_degree, max_degree + 1):
        for m in range(max_degree + 1):
            for n in range(max_degree + 1):
                if abs(k) + m + n <= max_degree:
                    yield k, m, n


def s7_monomials(max_degree: int):
    P = P7()
    for d in range(max_degree + 1):
        for ex in _compositions(d, P.nv):
            if P.is_reduced(P.mono_key(ex)):
                yield P.monomial(ex)


@dataclass
class AxiomReport:
    items: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    undecided: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and not self.undecided


def strong_connection_axioms(max_degree: int = 3, cap: int = 4,
                             method: str = "recursive") -> AxiomReport:
    if max_degree > cap:
        raise ValueError(f"max_degree {max_degree} exceeds cap {cap}")
    rep = AxiomReport()
    P = P7()
    counts = dict.fromkeys(["i", "ii", "iii", "iv", "v-right", "v-left"], 0)
    for key in r_indices(max_degree):
        h = r_basis(*key)
        L = ell(h, method)
        lm = lambda e: ell(e, method)
        if chi_bar(L) != tensor(P.one(), h):
            rep.failures.append(("i", key))
        counts["i"] += 1
        # (ii) (l (x) id) Delta = (id (x) Delta_R) l
        lhs = coproduct(h).map_leg(0, lm)
        rhs = L.map_leg(1, coaction)
        if not _teq(lhs, rhs):
            rep.failures.append(("ii", key))
        counts["ii"] += 1
        # (iii) (id (x) l) Delta = (Delta_L (x) id) l
        lhs = coproduct(h).map_leg(1, lm)
        rhs = L.map_leg(0, left_coaction)
        if not _teq(lhs, rhs):
            rep.failures.append(("iii", key))
        counts["iii"] += 1
        # (iv) h<1> h<2> = eps(h)
        if L.multiply_legs() != P.one() * counit(h):
            rep.failures.append(("iv", key))
        counts["iv"] += 1
    for p in s7_monomials(max_degree):
        t = delta_un(p)
        t2 = delta_un(p)
        for first, (h,) in coaction(p).items():
            t = t - omega(h, method).left_mul(first)
        ok, why = in_omega_B_P(t)
        if not ok:
            rep.failures.append(("v-right", p.render(), why))
        counts["v-right"] += 1
        for first, (h,) in coaction(p).items():
            t2 = t2 + omega(antipode(h), method) * tensor(P.one(), first)
        ok, why = in_P_omega_B(t2)
        if not ok:
            rep.failures.append(("v-left", p.render(), why))
        counts["v-left"] += 1
    rep.items = counts
    return rep


def _teq(a, b) -> bool:
    if a is None or (isinstance(a, Tensor) and a.is_zero()):
        return b is None or b.is_zero()
    if b is None:
        return a.is_zero()
    return a == b


# -- bijectivity on filtered components -----------------------------------------------------

def s7_monos_upto(D: int) -> list:
    P = P7()
    out = []
    for d in range(D + 1):
        for ex in _compositions(d, P.nv):
            m = P.mono_key(ex)
            if P.is_reduced(m):
                out.append((ex, d))
    return out


def coinvariant_basis(D: int) -> list:
    """Monomials in alpha, beta, x (and conjugates) of S^7-degree <= D, mapped into S^7."""
    from .fibration import s4_to_s7
    S4 = preset("s4")
    out = []
    for d in range(1, D // 2 + 1):
        for ex in _compositions(d, S4.nv):
            if S4.is_reduced(S4.mono_key(ex)):
                out.append(s4_to_s7(S4.monomial(ex)))
    return out


@dataclass
class BijectivityReport:
    bound: int
    dim_source: int
    dim_relations: int
    rank_chi: int
    descends: bool
    kernel_equals_relations: bool
    surjective_on_generators: bool

    @property
    def isomorphism(self) -> bool:
        return self.descends and self.kernel_equals_relations and self.surjective_on_generators


def _tvec(t: Tensor) -> dict:
    vec = {}
    for rest, d in t._d.items():
        for idx, s in element_vector(t.legs[0], d).items():
            vec[(rest, idx)] = s
    return vec


def galois_bijectivity_on_component(bound: int = 2, cap: int = 3) -> BijectivityReport:
    if bound > cap:
        raise ValueError(f"bound {bound} exceeds cap {cap}")
    P = P7()
    monos = s7_monos_upto(bound)
    src = []
    for ex1, d1 in monos:
        for ex2, d2 in monos:
            if d1 + d2 <= bound:
                src.append(tensor(P.monomial(ex1, ordered=False), P.monomial(ex2, ordered=False)))
    # relations p (x) b p' - p b (x) p'
    rels = []
    B = coinvariant_basis(bound)
    for b in B:
        db = b.degree()
        for ex1, d1 in monos:
            for ex2, d2 in monos:
                if d1 + d2 + db <= bound:
                    p1 = P.monomial(ex1, ordered=False)
                    p2 = P.monomial(ex2, ordered=False)
                    rels.append(tensor(p1, b * p2) - tensor(p1 * b, p2))
    rel_span = LinearSpan()
    for i, r in enumerate(rels):
        rel_span.add(_tvec(r), i)
    descends = all(chi_bar(r).is_zero() for r in rels)
    # kernel of chi_bar on the source component
    img_span = LinearSpan()
    kernel_dim = 0
    src_span = LinearSpan()
    for i, t in enumerate(src):
        src_span.add(_tvec(t), i)
    kernel_vectors = []
    # Gaussian elimination on images, tracking combinations
    for i, t in enumerate(src):
        v = _tvec(chi_bar(t))
        if not img_span.add(v, i):
            ok, comb = img_span.contains(v)
            # kernel element: t - sum comb * src
            kv = dict(_tvec(t))
            for tag, c in comb.items():
                for idx, s in _tvec(src[tag]).items():
                    cur = LinearSpan._f(kv.get(idx, Scalar(0))) - c * LinearSpan._f(s)
                    kv[idx] = cur
            kernel_vectors.append({i2: s for i2, s in kv.items() if not LinearSpan._f(s).is_zero()})
    kernel_in_rel = all(rel_span.contains(kv)[0] for kv in kernel_vectors)
    kernel_dim = len(kernel_vectors)
    surj = all(ok for _, ok in galois_witnesses().values())
    return BijectivityReport(bound, src_span.rank, rel_span.rank, img_span.rank, descends,
                             kernel_in_rel and kernel_dim == rel_span.rank, surj)


# -- connections on associated modules --------------------------------------------------------

def omega_matrix(n: int, method: str = "recursive") -> list:
    E = corepresentation(n).matrix
    return [[omega(E[k][l], method) for l in range(n + 1)] for k in range(n + 1)]


def project_universal(t: Tensor, cls=None):
    """pi: Omega^1_un(P) -> Omega^1(P), a (x) b -> a db (t must lie in ker m)."""
    from .exterior_calculus import ExteriorForm
    cls = cls or ExteriorForm
    P = t.legs[0]
    out = cls.zero(P)
    for first, (second,) in t.items():
        out = out + cls.from_algebra(first) * cls.differential(second)
    return out


def compare_with_grassmannian(n: int, method: str = "recursive") -> dict:
    """pi(omega(e^{(n)}_kl)) == A^{(n)}_kl for all k, l."""
    from .fibration import grassmann_connection
    A = grassmann_connection(n)
    W = omega_matrix(n, method)
    res = {}
    for k in range(n + 1):
        for l in range(n + 1):
            res[(k, l)] = project_universal(W[k][l]) == A[k][l]
    return res


def nabla_omega(n: int, f: list, method: str = "recursive") -> list:
    """nabla_omega(phi)(e_k) = delta phi(e_k) + sum_l omega(e_kl) phi(e_l) with
    phi(e_k) = <phi_k|f> for a coinvariant column f."""
    from .fibration import phi_pairings
    phis = phi_pairings(n, f)
    W = omega_matrix(n, method)
    out = []
    for k in range(n + 1):
        t = delta_un(phis[k])
        for l in range(n + 1):
            t = t + W[k][l] * tensor(P7().one(), phis[l])
        out.append(t)
    return out
