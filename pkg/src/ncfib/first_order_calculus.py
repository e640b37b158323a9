"""The first-order calculus: universal differential calculus modulo only the
bimodule relations a db = (phase) db a.  Words of differentials carry no
relations among themselves; over a sphere the one extra identification is
the ideal generated by R and dR, handled by an exact slotwise projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._forms import Form, tangent_vectors
from .nc_algebra import (AlgebraElement, NumericOracle, Presentation, ideal_membership)


class FirstOrderForm(Form):
    kind = "fo"
    __slots__ = ()


def fo_delta(a) -> FirstOrderForm:
    if isinstance(a, AlgebraElement):
        return FirstOrderForm.differential(a)
    if isinstance(a, FirstOrderForm):
        return a.d()
    raise TypeError("fo_delta expects an algebra element or a first-order form")


def fo_gen(P: Presentation, name: str) -> FirstOrderForm:
    return FirstOrderForm.generator(P, name)


def fo(a) -> FirstOrderForm:
    """Degree-0 form of an algebra element."""
    return FirstOrderForm.from_algebra(a)


def fo_multiply(a, b) -> FirstOrderForm:
    return fo(a) * b if isinstance(a, AlgebraElement) else a * b


def fo_adjoint(w: FirstOrderForm) -> FirstOrderForm:
    return w.adjoint()


@dataclass
class ZeroTest:
    verdict: str            # "zero" | "nonzero" | "undecided"
    method: str
    detail: dict

    def __str__(self):
        return self.verdict


def sphere_relations(P: Presentation, cls=FirstOrderForm) -> list:
    """R and dR in the ambient calculus."""
    R = P.sphere_relation()
    return [cls.from_algebra(R), cls.differential(R)]


def numeric_nonzero(w: Form, samples: int = 4, seed: int = 0, tol: float = 1e-8):
    """Largest evaluation of w on random tangent vectors at random points
    (a nonzero value certifies w is nonzero in the sphere quotient)."""
    P = w.P
    O = NumericOracle(P)
    rng = np.random.default_rng(seed)
    best = 0.0
    p = max(w.degrees(), default=0)
    for _ in range(samples):
        pt = O.random_point(rng)
        vs = tangent_vectors(P, pt, rng, p)
        best = max(best, float(np.abs(w.evaluate(O, pt, vs)).max()))
    return best


def is_zero_in_quotient(w: Form, bound: int | None = None, method: str = "canonical",
                        cls=FirstOrderForm) -> ZeroTest:
    if w.P.relation is None:
        return ZeroTest("zero" if w.is_zero() else "nonzero", "exact", {})
    if method == "canonical":
        c = w.canonical()
        if c.is_zero():
            return ZeroTest("zero", "canonical", {})
        val = numeric_nonzero(c)
        return ZeroTest("nonzero" if val > 1e-8 else "undecided", "canonical",
                        {"numeric_max": val})
    # membership oracle in the ambient calculus
    amb = w.lift(w.P.ambient())
    rels = sphere_relations(w.P, cls)
    undecided = False
    for c, part in _charge_parts(amb).items():
        cert = ideal_membership(part, rels, bound)
        if not cert.member:
            undecided = True
            break
    if not undecided:
        return ZeroTest("zero", "oracle", {"bound": bound})
    val = numeric_nonzero(w.canonical())
    return ZeroTest("nonzero" if val > 1e-8 else "undecided", "oracle",
                    {"bound": bound, "numeric_max": val})


def _charge_parts(w: Form) -> dict:
    P = w.P
    from ._forms import word_charge
    parts: dict = {}
    for ww, t in w._w.items():
        cw = word_charge(P, ww)
        for k, v in t.items():
            c = tuple(x + y for x, y in zip(cw, P.charge(k)))
            parts.setdefault(c, {}).setdefault(ww, {})[k] = v
    return {c: type(w)(P, d) for c, d in parts.items()}


def fo_is_zero_in_quotient(w: FirstOrderForm, bound: int | None = None,
                           method: str = "canonical") -> ZeroTest:
    return is_zero_in_quotient(w, bound, method, FirstOrderForm)


def pairing(bra, ket) -> FirstOrderForm:
    """<xi|eta> = sum_j xi_j^* eta_j for columns of algebra elements or forms."""
    total = None
    for x, y in zip(bra, ket):
        x = x if isinstance(x, Form) else fo(x)
        term = x.adjoint() * y
        total = term if total is None else total + term
    return total
