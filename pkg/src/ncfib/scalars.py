"""Exact coefficients: Gaussian-rational Laurent polynomials in the half-phase mu.

A Scalar is a finite sum of terms c * mu^k * sqrt(d) * i^e with c rational,
k an integer, d a positive squarefree integer and e in {0, 1}.  mu is a
formal unitary (conj(mu) = 1/mu), so the ring is an integral domain with
syntactic equality.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from itertools import product as _iproduct
from typing import Iterable


@lru_cache(maxsize=None)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, r) with n = s*s*r and r squarefree."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    s, r, p = 1, 1, 2
    m = n
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            r *= p
        p += 1
    r *= m
    return s, r


@lru_cache(maxsize=None)
def radical_product(d1: int, d2: int) -> tuple[int, int]:
    """sqrt(d1)*sqrt(d2) = f*sqrt(d) with d squarefree; returns (f, d)."""
    return squarefree_split(d1 * d2)


def _primes(d: int) -> list[int]:
    out, p = [], 2
    while p * p <= d:
        if d % p == 0:
            out.append(p)
            d //= p
        p += 1
    if d > 1:
        out.append(d)
    return out


class Scalar:
    """Immutable exact scalar; internal map (k, d, e) -> Fraction."""

    __slots__ = ("_c", "_h")

    def __init__(self, value=0):
        if isinstance(value, Scalar):
            self._c = value._c
        elif isinstance(value, dict):
            self._c = {k: Fraction(v) for k, v in value.items() if v}
        elif value == 0:
            self._c = {}
        else:
            self._c = {(0, 1, 0): Fraction(value)}
        self._h = None

    @classmethod
    def _raw(cls, c: dict) -> "Scalar":
        s = cls.__new__(cls)
        s._c = c
        s._h = None
        return s

    @classmethod
    def normalize(cls, raw: Iterable[tuple]) -> "Scalar":
        """Build from raw terms (coeff, k, d[, e]) with arbitrary d > 0 and e >= 0."""
        acc: dict = {}
        for t in raw:
            c, k, d = Fraction(t[0]), int(t[1]), int(t[2])
            e = int(t[3]) if len(t) > 3 else 0
            s, r = squarefree_split(d)
            c *= s
            if e % 4 >= 2:
                c = -c
            key = (k, r, e % 2)
            acc[key] = acc.get(key, 0) + c
        return cls._raw({k: v for k, v in acc.items() if v})

    @classmethod
    def mu(cls, k: int = 1) -> "Scalar":
        return cls._raw({(k, 1, 0): Fraction(1)})

    @classmethod
    def sqrt(cls, d: int) -> "Scalar":
        return cls.normalize([(1, 0, d)])

    @classmethod
    def i(cls) -> "Scalar":
        return cls._raw({(0, 1, 1): Fraction(1)})

    @classmethod
    def gaussian(cls, re, im=0, k: int = 0, d: int = 1) -> "Scalar":
        return cls.normalize([(re, k, d, 0), (im, k, d, 1)])

    # -- views ----------------------------------------------------------
    @property
    def terms(self) -> dict:
        """Map (mu_exponent, radicand) -> (re, im) Gaussian rational."""
        out: dict = {}
        for (k, d, e), c in self._c.items():
            re, im = out.get((k, d), (Fraction(0), Fraction(0)))
            out[(k, d)] = (re, im + c) if e else (re + c, im)
        return out

    def items(self):
        return self._c.items()

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def is_rational(self) -> bool:
        return all(k == (0, 1, 0) for k in self._c)

    def rational(self) -> Fraction:
        if not self._c:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError(f"not rational: {self}")
        return self._c[(0, 1, 0)]

    def is_monomial(self) -> bool:
        return len(self._c) == 1

    def mu_exponents(self) -> set:
        return {k for k, _, _ in self._c}

    # -- arithmetic -----------------------------------------------------
    @staticmethod
    def _coerce(o) -> "Scalar":
        if isinstance(o, Scalar):
            return o
        if isinstance(o, (int, Fraction)):
            return Scalar(o)
        return NotImplemented

    def __add__(self, o):
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        c = dict(self._c)
        for k, v in o._c.items():
            w = c.get(k, 0) + v
            if w:
                c[k] = w
            else:
                c.pop(k, None)
        return Scalar._raw(c)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw({k: -v for k, v in self._c.items()})

    def __sub__(self, o):
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            if not o:
                return Scalar()
            return Scalar._raw({k: v * o for k, v in self._c.items()})
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        c: dict = {}
        for (k1, d1, e1), v1 in self._c.items():
            for (k2, d2, e2), v2 in o._c.items():
                v = v1 * v2
                if d1 == 1:
                    d = d2
                elif d2 == 1:
                    d = d1
                else:
                    f, d = radical_product(d1, d2)
                    v *= f
                e = e1 + e2
                if e == 2:
                    v, e = -v, 0
                key = (k1 + k2, d, e)
                w = c.get(key, 0) + v
                if w:
                    c[key] = w
                else:
                    c.pop(key, None)
        return Scalar._raw(c)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            inv = self.invert()
            if not inv.den.is_one():
                raise ZeroDivisionError("negative power of a non-unit scalar")
            return inv.num ** (-n)
        r, b = Scalar(1), self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __truediv__(self, o):
        if isinstance(o, (int, Fraction)):
            if not o:
                raise ZeroDivisionError("division by zero scalar")
            return Scalar._raw({k: v / o for k, v in self._c.items()})
        o = self._coerce(o)
        frac = o.invert() * self
        if not frac.den.is_one():
            raise ZeroDivisionError("divisor is not a unit; use ScalarFraction")
        return frac.num

    def conj(self) -> "Scalar":
        return Scalar._raw({(-k, d, e): (-v if e else v) for (k, d, e), v in self._c.items()})

    def galois(self, flips: dict, flip_i: bool) -> "Scalar":
        """Apply sqrt(p) -> -sqrt(p) for primes p with flips[p], and i -> -i."""
        c = {}
        for (k, d, e), v in self._c.items():
            sgn = 1
            for p, f in flips.items():
                if f and d % p == 0:
                    sgn = -sgn
            if flip_i and e:
                sgn = -sgn
            c[(k, d, e)] = v * sgn
        return Scalar._raw(c)

    def invert(self) -> "ScalarFraction":
        if not self._c:
            raise ZeroDivisionError("cannot invert zero scalar")
        if len(self._c) == 1:
            ((k, d, e), v), = self._c.items()
            # 1/(v mu^k sqrt(d) i^e) = mu^-k sqrt(d)/(v d) (-i)^e
            c = Fraction(1) / (v * d)
            if e:
                c = -c
            return ScalarFraction(Scalar._raw({(-k, d, e): c}))
        ks = self.mu_exponents()
        if len(ks) == 1:
            primes = sorted({p for (_, d, _) in self._c for p in _primes(d)})
            has_i = any(e for (_, _, e) in self._c)
            conjs = []
            for signs in _iproduct((False, True), repeat=len(primes) + 1):
                flips = dict(zip(primes, signs[:-1]))
                if signs[-1] and not has_i:
                    continue
                if not any(signs):
                    continue
                conjs.append(self.galois(flips, signs[-1]))
            other = Scalar(1)
            for g in conjs:
                other = other * g
            norm = self * other
            if norm.is_monomial():
                return ScalarFraction(other * norm.invert().num)
        return ScalarFraction(Scalar(1), self)

    def eval_numeric(self, theta) -> complex:
        mu = cmath.exp(1j * math.pi * float(theta))
        return sum(float(v) * mu ** k * math.sqrt(d) * (1j if e else 1)
                   for (k, d, e), v in self._c.items()) + 0j

    def subs_mu(self, k_mu: int) -> "Scalar":
        """Substitute mu -> mu^k_mu (k_mu = 0 gives the theta = 0 limit)."""
        c: dict = {}
        for (k, d, e), v in self._c.items():
            key = (k * k_mu, d, e)
            w = c.get(key, 0) + v
            if w:
                c[key] = w
            else:
                c.pop(key, None)
        return Scalar._raw(c)

    # -- comparison / hashing ------------------------------------------
    def __eq__(self, o):
        if isinstance(o, (int, Fraction)):
            o = Scalar(o)
        if not isinstance(o, Scalar):
            return NotImplemented
        return self._c == o._c

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._c.items()))
        return self._h

    def is_one(self) -> bool:
        return self._c == {(0, 1, 0): 1}

    def sort_key(self):
        return sorted(self._c.items())

    def __repr__(self):
        return f"Scalar({render_scalar(self)})"

    def __str__(self):
        return render_scalar(self)


class ScalarFraction:
    """Quotient num/den of Scalars.  A monomial denominator is always absorbed;
    otherwise both parts are scaled so the leading denominator term is 1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = Scalar._coerce(num) if not isinstance(num, Scalar) else num
        if den is None:
            den = Scalar(1)
        elif not isinstance(den, Scalar):
            den = Scalar(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.is_monomial() and not den.is_one():
            num = num * den.invert().num
            den = Scalar(1)
        elif not den.is_monomial():
            lead = max(den._c)
            inv = Scalar._raw({lead: 1}).invert().num * (Fraction(1) / den._c[lead])
            num, den = num * inv, den * inv
        self.num, self.den = num, den

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, o):
        o = _frac(o)
        if self.den.is_one() and o.den.is_one():
            return ScalarFraction(self.num + o.num)
        return ScalarFraction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return ScalarFraction(-self.num, self.den)

    def __sub__(self, o):
        return self + (-_frac(o))

    def __mul__(self, o):
        o = _frac(o)
        return ScalarFraction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "ScalarFraction":
        if self.num.is_zero():
            raise ZeroDivisionError("cannot invert zero")
        inv = self.num.invert()
        return ScalarFraction(inv.num * self.den, inv.den)

    def __truediv__(self, o):
        return self * _frac(o).inverse()

    def __eq__(self, o):
        o = _frac(o)
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        raise TypeError("ScalarFraction is unhashable")

    def as_scalar(self) -> Scalar:
        if not self.den.is_one():
            raise ValueError("fraction has a non-trivial denominator")
        return self.num

    def eval_numeric(self, theta) -> complex:
        return self.num.eval_numeric(theta) / self.den.eval_numeric(theta)

    def __repr__(self):
        if self.den.is_one():
            return f"ScalarFraction({self.num})"
        return f"ScalarFraction(({self.num})/({self.den}))"


def _frac(o) -> ScalarFraction:
    if isinstance(o, ScalarFraction):
        return o
    return ScalarFraction(o if isinstance(o, Scalar) else Scalar(o))


def scalar_normalize(raw) -> Scalar:
    return Scalar.normalize(raw)


def scalar_conjugate(s: Scalar) -> Scalar:
    return s.conj()


def scalar_invert(s: Scalar) -> ScalarFraction:
    return s.invert()


def scalar_eval_numeric(s: Scalar, theta) -> complex:
    return s.eval_numeric(theta)


# -- rendering ------------------------------------------------------------

def _render_unit(k: int, d: int, e: int) -> list[str]:
    parts = []
    if e:
        parts.append("i")
    if d != 1:
        parts.append(f"sqrt({d})")
    if k:
        parts.append(f"mu^{k}")
    return parts


def render_term(c: Fraction, k: int, d: int, e: int) -> tuple[str, str]:
    """Return (sign, body) for one scalar term."""
    sign = "-" if c < 0 else "+"
    a = abs(c)
    parts = _render_unit(k, d, e)
    if a != 1 or not parts:
        parts.insert(0, str(a))
    return sign, "*".join(parts)


def render_scalar(s: Scalar) -> str:
    if s.is_zero():
        return "0"
    out = []
    for (k, d, e), c in sorted(s._c.items()):
        sign, body = render_term(c, k, d, e)
        if not out:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)
