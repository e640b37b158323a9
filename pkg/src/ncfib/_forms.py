"""Shared machinery for the two differential calculi.

A form is stored as {word: {key: coeff}} where a word is a tuple of
generator indices (one letter per differential).  In the split picture the
pair [w, m] is the classical form (letters times monomial) tensored with the
torus word of the total charge, so products only need the bicharacter phase
of the total charges.  For the first-order calculus words are ordered
tensor words; for the exterior calculus they are strictly increasing.

Sphere quotients are handled by exact canonical projections:
  first order: each slot projected by dg -> dg - (g/2) dR, then coefficients
               reduced (the kernel of this projection is exactly the span of dR);
  exterior:    w -> w - dR ^ i_X w with X half the Euler field.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .nc_algebra import (AlgebraElement, Presentation, PresentationError,
                         _compositions, add_into, clean, conj_key, element_vector,
                         mul_dicts, render_coeff_body, render_mono, scalar_terms)
from .scalars import Scalar

HALF = Fraction(1, 2)


def word_charge(P: Presentation, w) -> tuple:
    n = P.npairs
    c = [0] * n
    for g in w:
        gc = P.gen_charge[g]
        for i in range(n):
            c[i] += gc[i]
    return tuple(c)


def bar_index(P: Presentation, g: int) -> int:
    n = P.npairs
    if g < n:
        return g + n
    if g < 2 * n:
        return g - n
    return g


def merge_sorted(w1, w2):
    """Wedge of two increasing words: (word, sign) or (None, 0)."""
    if not w1:
        return w2, 1
    if not w2:
        return w1, 1
    s1 = set(w1)
    if any(g in s1 for g in w2):
        return None, 0
    inv = 0
    for g in w2:
        inv += sum(1 for h in w1 if h > g)
    return tuple(sorted(w1 + w2)), (-1 if inv % 2 else 1)


def sort_word(w):
    """Sort a word of distinct letters, returning (sorted, sign) or (None, 0)."""
    if len(set(w)) != len(w):
        return None, 0
    inv = sum(1 for i in range(len(w)) for j in range(i + 1, len(w)) if w[i] > w[j])
    return tuple(sorted(w)), (-1 if inv % 2 else 1)


def partial(P: Presentation, t: dict, g: int) -> dict:
    sh = P.sh[g]
    u = 1 << sh
    out = {}
    for k, v in t.items():
        e = (k >> sh) & 0xFF
        if e:
            out[k - u] = v * e
    return out


def euler(P: Presentation, t: dict) -> dict:
    out = {}
    for k, v in t.items():
        d = P.degree(k)
        if d:
            out[k] = v * d
    return out


def relation_gradient(P: Presentation) -> list:
    """For sphere presentations: list over generators h of the classical
    monomial key dR/dh (with its integer factor), or None for no relation."""
    rel = P.relation
    if rel is None:
        return None
    if rel not in ("odd", "even"):
        raise PresentationError(f"calculus not supported on {P.name}")
    n = P.npairs
    grad = []
    for h in range(P.nv):
        if h < 2 * n:
            grad.append((P.unit(bar_index(P, h)), 1))
        else:
            grad.append((P.unit(h), 2))
    return grad


class Form:
    """Element of a differential calculus over a twisted algebra."""

    kind = "fo"
    __slots__ = ("P", "_w", "_canon")

    def __init__(self, P: Presentation, w: dict):
        self.P = P
        self._w = w
        self._canon = None

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, P):
        return cls(P, {})

    @classmethod
    def from_algebra(cls, a: AlgebraElement):
        return cls(a.P, {(): dict(a._t)} if a._t else {})

    @classmethod
    def generator(cls, P: Presentation, name: str):
        """The differential of a generator."""
        return cls.differential(P.gen(name))

    @classmethod
    def differential(cls, a: AlgebraElement):
        return cls(a.P, cls._d0(a.P, a._t))

    @classmethod
    def _d0(cls, P: Presentation, t: dict) -> dict:
        """d of a function (raw representative: plain partial derivatives)."""
        out = {}
        for h in range(P.nv):
            dh = P.reduce_dict(partial(P, t, h))
            if dh:
                out[(h,)] = dh
        return out

    # -- basic protocol ------------------------------------------------------
    def _wrap(self, w):
        return type(self)(self.P, w)

    def _coerce(self, o):
        if isinstance(o, Form):
            if o.P is not self.P:
                raise PresentationError(f"presentation mismatch: {self.P.name} vs {o.P.name}")
            if o.kind != self.kind:
                raise TypeError("cannot mix calculi")
            return o
        if isinstance(o, AlgebraElement):
            if o.P is not self.P:
                raise PresentationError("presentation mismatch")
            return type(self).from_algebra(o)
        if isinstance(o, (int, Fraction, Scalar)):
            t = scalar_terms(self.P, o)
            return type(self)(self.P, {(): t} if t else {})
        return None

    @property
    def degree(self) -> int:
        ds = {len(w) for w in self._w}
        if not ds:
            return 0
        if len(ds) > 1:
            raise ValueError("inhomogeneous form degree")
        return ds.pop()

    def degrees(self) -> set:
        return {len(w) for w in self._w}

    def is_zero(self) -> bool:
        """Zero in the quotient (exact canonical projection)."""
        return not self.canonical()._w

    def is_raw_zero(self) -> bool:
        return not self._w

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, o):
        o2 = self._coerce(o) if not isinstance(o, Form) else o
        if not isinstance(o2, Form):
            return NotImplemented
        if self.P is not o2.P or self.kind != o2.kind:
            return False
        return self.canonical()._w == o2.canonical()._w

    def __hash__(self):
        c = self.canonical()._w
        return hash(frozenset((w, frozenset(t.items())) for w, t in c.items()))

    def __add__(self, o):
        o = self._coerce(o)
        if o is None:
            return NotImplemented
        out = {w: dict(t) for w, t in self._w.items()}
        for w, t in o._w.items():
            d = out.setdefault(w, {})
            add_into(d, t)
        return self._wrap(_clean_w(out))

    __radd__ = __add__

    def __neg__(self):
        return self._wrap({w: {k: -v for k, v in t.items()} for w, t in self._w.items()})

    def __sub__(self, o):
        o = self._coerce(o)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def _mul(self, a: "Form", b: "Form") -> "Form":
        P = self.P
        out: dict = {}
        ext = self.kind == "ext"
        for w1, t1 in a._w.items():
            c1 = word_charge(P, w1)
            for w2, t2 in b._w.items():
                if ext:
                    w, s = merge_sorted(w1, w2)
                    if w is None:
                        continue
                else:
                    w, s = w1 + w2, 1
                prod = mul_dicts(P, t1, t2, reduce=False, off_a=c1, off_b=word_charge(P, w2))
                add_into(out.setdefault(w, {}), prod, s)
        return self._wrap(_clean_w({w: P.reduce_dict(t) for w, t in out.items()}))

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            if not o:
                return self._wrap({})
            return self._wrap({w: {k: v * o for k, v in t.items()} for w, t in self._w.items()})
        o2 = self._coerce(o)
        if o2 is None:
            return NotImplemented
        return self._mul(self, o2)

    def __rmul__(self, o):
        if isinstance(o, (int, Fraction)):
            return self * o
        o2 = self._coerce(o)
        if o2 is None:
            return NotImplemented
        return self._mul(o2, self)

    def __pow__(self, n: int):
        r = self._coerce(1)
        for _ in range(n):
            r = r * self
        return r

    # -- differential and involution ---------------------------------------------
    def d(self) -> "Form":
        P = self.P
        out: dict = {}
        ext = self.kind == "ext"
        for w, t in self._w.items():
            p = len(w)
            for (h,), dt in self._d_raw(P, t).items():
                if ext:
                    nw, s = merge_sorted((h,), w)
                    if nw is None:
                        continue
                else:
                    nw, s = w + (h,), (-1 if p % 2 else 1)
                add_into(out.setdefault(nw, {}), dt, s)
        return self._wrap(_clean_w({w: P.reduce_dict(t) for w, t in out.items()}))

    @staticmethod
    def _d_raw(P, t):
        out = {}
        for h in range(P.nv):
            dh = partial(P, t, h)
            if dh:
                out[(h,)] = dh
        return out

    delta = d

    def adjoint(self) -> "Form":
        P = self.P
        out: dict = {}
        ext = self.kind == "ext"
        for w, t in self._w.items():
            p = len(w)
            wb = [bar_index(P, g) for g in w]
            if ext:
                nw, s = sort_word(tuple(wb))
            else:
                nw = tuple(reversed(wb))
                s = -1 if (p * (p - 1) // 2) % 2 else 1
            wc = word_charge(P, w)
            d = out.setdefault(nw, {})
            for k, v in t.items():
                k2, v2 = conj_key(P, k, v, wc)
                d[k2] = d.get(k2, 0) + s * v2
        return self._wrap(_clean_w(out))

    star = adjoint

    # -- canonical form in the sphere quotient --------------------------------------
    def canonical(self) -> "Form":
        """Unique representative of the class in the sphere quotient."""
        if self._canon is not None:
            return self._canon
        P = self.P
        grad = relation_gradient(P)
        if grad is None:
            res = self
        elif self.kind == "fo":
            w = self._w
            maxp = max((len(x) for x in w), default=0)
            for slot in range(maxp):
                w = _project_slot(P, w, slot, grad)
            res = self._wrap(w)
        else:
            res = self._wrap(self._project_ext(P, self._w))
        res._canon = res
        self._canon = res
        return res

    @staticmethod
    def _project_ext(P, w: dict) -> dict:
        grad = relation_gradient(P)
        out = {ww: dict(t) for ww, t in w.items()}
        for ww, t in w.items():
            if not ww:
                continue
            # - dR ^ i_X (w t),  i_X dg = g/2
            for j, g in enumerate(ww):
                rest = ww[:j] + ww[j + 1:]
                sj = -1 if j % 2 else 1
                ug = P.unit(g)
                for h in range(P.nv):
                    nw, s = merge_sorted((h,), rest)
                    if nw is None:
                        continue
                    u, c = grad[h]
                    f = -s * sj * c * HALF
                    d = out.setdefault(nw, {})
                    for k, v in t.items():
                        kk = k + ug + u
                        d[kk] = d.get(kk, 0) + f * v
        return _clean_w({ww: P.reduce_dict(t) for ww, t in out.items()})

    # -- views ---------------------------------------------------------------------
    def coefficient_dicts(self) -> dict:
        return self._w

    def coefficient(self, word) -> AlgebraElement:
        return AlgebraElement(self.P, dict(self._w.get(tuple(word), {})))

    @property
    def terms(self) -> dict:
        """word (generator names) -> right coefficient in the ordered view:
        the form equals sum  dg_1 ... dg_p * coeff  with ordered products."""
        P = self.P
        out = {}
        for w, t in self._w.items():
            # ordered word (product of the dg) = mu^ph [w]; [w][m] = mu^{beta(Cw, Cm)} [w m]
            ph = _word_phase(P, w)
            cw = word_charge(P, w)
            adj = {}
            for k, v in t.items():
                b = P.beta(cw, P.charge(k))
                kk = k - (ph + b) * P.MUUNIT
                adj[kk] = adj.get(kk, 0) + v
            out[tuple(P.names[g] for g in w)] = AlgebraElement(P, adj)
        return out

    def torus_degrees(self) -> set:
        P = self.P
        out = set()
        for w, t in self._w.items():
            cw = word_charge(P, w)
            for k in t:
                out.add(tuple(x + y for x, y in zip(cw, P.charge(k))))
        return out

    def render(self) -> str:
        if not self._w:
            return "0"
        P = self.P
        tok = "delta" if self.kind == "fo" else "d"
        parts = []
        terms = self.terms
        for w in sorted(terms, key=lambda x: (len(x), [P.gindex[n] for n in x])):
            wtxt = "*".join(f"{tok}({n})" for n in w)
            for ex, s in sorted(terms[w].terms.items(), key=lambda kv: (sum(kv[0]), kv[0])):
                body = render_mono(P, ex)
                body = wtxt + ("*" + body if body else "") if wtxt else body
                sign, txt = render_coeff_body(s, body)
                if not parts:
                    parts.append(txt if sign == "+" else "-" + txt)
                else:
                    parts.append(f" {sign} {txt}")
        return "".join(parts)

    __str__ = render

    def __repr__(self):
        return f"<{type(self).__name__} {self.P.name}: {self.render()}>"

    def subs_mu(self, kmu: int) -> "Form":
        from .nc_algebra import subs_mu_key
        out = {}
        for w, t in self._w.items():
            d = out.setdefault(w, {})
            for k, v in t.items():
                k2 = subs_mu_key(self.P, k, kmu)
                d[k2] = d.get(k2, 0) + v
        return self._wrap(_clean_w(out))

    def lift(self, Q: Presentation) -> "Form":
        """Same representative viewed over another presentation with the same
        generators (used to pass to the ambient algebra)."""
        return type(self)(Q, {w: dict(t) for w, t in self._w.items()})

    def graded_space(self):
        return FormSpace(type(self))

    # -- numerics ---------------------------------------------------------------------
    def evaluate(self, oracle, point, vectors) -> np.ndarray:
        """Evaluate at a classical point on tangent vectors (complex
        coordinate components per generator): first-order forms are
        evaluated slot by slot, exterior forms antisymmetrised."""
        P = self.P
        out = np.zeros((oracle.N, oracle.N), dtype=complex)
        for w, t in self._w.items():
            p = len(w)
            if self.kind == "fo":
                wv = 1.0 + 0j
                for j, g in enumerate(w):
                    wv *= vectors[j][g]
            else:
                M = np.array([[vectors[j][g] for g in w] for j in range(p)]) if p else None
                wv = np.linalg.det(M) if p else 1.0
            if wv == 0:
                continue
            cw = word_charge(P, w)
            for k, v in t.items():
                c = tuple(x + y for x, y in zip(cw, P.charge(k)))
                mu, d, e = P.scalar_fields(k)
                ex = P.exps(k & P.MONOMASK)
                val = float(v) * oracle.mu ** mu * np.sqrt(d) * (1j if e else 1) * wv
                for g, eg in enumerate(ex):
                    if eg:
                        val *= point[g] ** eg
                out += val * oracle.U(c)
        return out


def _word_phase(P: Presentation, w) -> int:
    prev = [0] * P.npairs
    ph = 0
    for g in w:
        c = P.gen_charge[g]
        ph += P.beta(prev, c)
        prev = [a + b for a, b in zip(prev, c)]
    return ph


def _clean_w(w: dict) -> dict:
    out = {}
    for ww, t in w.items():
        t = clean(t)
        if t:
            out[ww] = t
    return out


def _project_slot(P, w: dict, slot: int, grad) -> dict:
    out: dict = {}
    for ww, t in w.items():
        if len(ww) <= slot:
            add_into(out.setdefault(ww, {}), t)
            continue
        g = ww[slot]
        add_into(out.setdefault(ww, {}), t)
        ug = P.unit(g)
        for h in range(P.nv):
            u, c = grad[h]
            nw = ww[:slot] + (h,) + ww[slot + 1:]
            f = -c * HALF
            d = out.setdefault(nw, {})
            for k, v in t.items():
                kk = k + ug + u
                d[kk] = d.get(kk, 0) + f * v
    return _clean_w({ww: P.reduce_dict(t) for ww, t in out.items()})


def tangent_vectors(P: Presentation, point, rng, count: int):
    """Random real tangent vectors at a point of the sphere, returned as
    complex coordinate components (dz_i(v), dzb_i(v), dx(v))."""
    n = P.npairs
    z = point[:n]
    real = np.concatenate([np.column_stack([z.real, z.imag]).ravel(), point[2 * n:].real])
    vs = []
    for _ in range(count):
        v = rng.normal(size=real.size)
        if P.relation in ("odd", "even"):
            v = v - real * (v @ real) / (real @ real)
        zc = v[0:2 * n:2] + 1j * v[1:2 * n:2]
        vs.append(np.concatenate([zc, zc.conj(), v[2 * n:].astype(complex)]))
    return vs


class FormSpace:
    """GradedSpace protocol used by ideal_membership for forms."""

    def __init__(self, cls):
        self.cls = cls

    def degree(self, e) -> int:
        P = e.P
        return max((len(w) + P.degree(k) for w, t in e._w.items() for k in t), default=0)

    def charges(self, e) -> set:
        return e.torus_degrees()

    def form_degree(self, e) -> int:
        return e.degree

    def vector(self, e) -> dict:
        P = e.P
        vec = {}
        for w, t in e._w.items():
            for idx, s in element_vector(P, t).items():
                vec[(w, idx)] = s
        return vec

    def sandwiches(self, r, bound, charge, fdeg):
        cls = self.cls
        if isinstance(r, AlgebraElement):
            r = cls.from_algebra(r)
        P = r.P
        rdeg = self.degree(r)
        rp = r.degree
        room = bound - rdeg
        if room < 0 or rp > fdeg:
            return
        n = P.npairs
        rcs = r.torus_degrees()
        rc = next(iter(rcs)) if rcs else tuple([0] * n)
        need = fdeg - rp
        basis = list(_basis_forms(P, cls, room, need))
        for la, fa, da, ca in basis:
            for rb, fb, db, cb in basis:
                if da + db > room or fa + fb != need:
                    continue
                if charge is not None and tuple(x + y + z for x, y, z in zip(ca, rc, cb)) != charge:
                    continue
                prod = la * r * rb
                yield la, rb, prod


def _basis_forms(P, cls, room, maxletters):
    """Basis elements [w, m] (plain letters, split monomials) with at most
    maxletters letters and total degree <= room."""
    ext = cls.kind == "ext"
    for p in range(maxletters + 1):
        words = _words(P.nv, p, ext)
        for w in words:
            for t in range(room - p + 1):
                for ex in _compositions(t, P.nv):
                    m = P.mono_key(ex)
                    f = cls(P, {w: {P.ZERO + m: Fraction(1)}})
                    c = tuple(x + y for x, y in zip(word_charge(P, w), P.charge(m)))
                    yield f, p, p + t, c


def _words(nv, p, ext):
    from itertools import combinations, product
    if ext:
        return list(combinations(range(nv), p))
    return list(product(range(nv), repeat=p))
