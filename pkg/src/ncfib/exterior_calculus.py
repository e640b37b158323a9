"""Exterior calculus of the twisted spheres: d-letters anticommute up to the
same phases as the generators, functions exchange with them by phases, and
over a sphere the ideal generated by R and dR is factored out."""
from __future__ import annotations

from ._forms import Form
from .first_order_calculus import ZeroTest, is_zero_in_quotient, sphere_relations
from .nc_algebra import AlgebraElement, Presentation


class ExteriorForm(Form):
    kind = "ext"
    __slots__ = ()


def ext(a) -> ExteriorForm:
    return ExteriorForm.from_algebra(a)


def ext_gen(P: Presentation, name: str) -> ExteriorForm:
    return ExteriorForm.generator(P, name)


def ext_d(w) -> ExteriorForm:
    if isinstance(w, AlgebraElement):
        return ExteriorForm.differential(w)
    return w.d()


def ext_multiply(a, b) -> ExteriorForm:
    return ext(a) * b if isinstance(a, AlgebraElement) else a * b


def ext_adjoint(w: ExteriorForm) -> ExteriorForm:
    return w.adjoint()


def ext_reduce_sphere(w: ExteriorForm, bound: int | None = None,
                      method: str = "canonical") -> tuple[ExteriorForm, ZeroTest]:
    """Canonical representative plus zero test (oracle on request)."""
    return w.canonical(), is_zero_in_quotient(w, bound, method, ExteriorForm)


def ext_sphere_relations(P: Presentation) -> list:
    return sphere_relations(P, ExteriorForm)


class MatrixError(ValueError):
    pass


def _shape(M):
    r = len(M)
    c = len(M[0]) if r else 0
    if any(len(row) != c for row in M):
        raise MatrixError("ragged matrix")
    return r, c


def matrix_d(M, cls=ExteriorForm):
    _shape(M)
    return [[(cls.differential(x) if isinstance(x, AlgebraElement) else x.d()) for x in row]
            for row in M]


def matrix_product(A, B):
    ra, ca = _shape(A)
    rb, cb = _shape(B)
    if ca != rb:
        raise MatrixError(f"shape mismatch {ra}x{ca} * {rb}x{cb}")
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            s = None
            for k in range(ca):
                t = A[i][k] * B[k][j]
                s = t if s is None else s + t
            row.append(s)
        out.append(row)
    return out


def matrix_trace(M):
    r, c = _shape(M)
    if r != c:
        raise MatrixError("trace of a non-square matrix")
    s = M[0][0]
    for i in range(1, r):
        s = s + M[i][i]
    return s
