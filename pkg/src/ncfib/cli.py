"""Command line front end: expression parser, subcommands and JSON reports.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
3 a zero test stayed undecided.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .exterior_calculus import ExteriorForm
from .first_order_calculus import FirstOrderForm
from .hopf_galois import Tensor, tensor
from .nc_algebra import AlgebraElement, Presentation, PresentationError, UnknownGenerator, preset
from .scalars import Scalar

SCHEMA = "ncfib-report/1"

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_UNDECIDED = 0, 1, 2, 3


# -- parser ----------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line, self.column = line, col


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<tensor>\(x\))
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^/()])
""", re.VERBOSE)


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


@dataclass
class Node:
    kind: str           # gen, num, mu, i, sqrt, adj, d, delta, add, sub, neg, mul, pow, tensor
    value: object = None
    args: tuple = ()
    pos: int = 0


_ATOM_START = {"num", "name"}


class Parser:
    """Grammar (loosest first):
        expr    := ['-'] tterm (('+' | '-') tterm)*
        tterm   := product ('(x)' product)*
        product := power (['*'] power)*
        power   := postfix ['^' ['-'] NUM]
        postfix := atom '*'*            (adjoint when '*' does not start a factor)
        atom    := NUM ['/' NUM] | mu | i | sqrt(NUM) | d(expr) | delta(expr)
                 | generator | '(' expr ')'
    """

    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        t = self.next()
        if t[1] != val:
            raise ParseError(f"expected {val!r}, found {t[1] or 'end of input'!r}", self.text, t[2])
        return t

    def parse(self) -> Node:
        n = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", self.text, t[2])
        return n

    def expr(self) -> Node:
        t = self.peek()
        if t[1] == "-":
            self.next()
            node = Node("neg", args=(self.tterm(),), pos=t[2])
        else:
            node = self.tterm()
        while self.peek()[1] in ("+", "-"):
            op = self.next()
            rhs = self.tterm()
            node = Node("add" if op[1] == "+" else "sub", args=(node, rhs), pos=op[2])
        return node

    def tterm(self) -> Node:
        legs = [self.product()]
        while self.peek()[0] == "tensor":
            self.next()
            legs.append(self.product())
        return legs[0] if len(legs) == 1 else Node("tensor", args=tuple(legs), pos=legs[0].pos)

    def _starts_factor(self, k: int = 0) -> bool:
        t = self.peek(k)
        return t[0] in _ATOM_START or t[1] == "("

    def product(self) -> Node:
        node = self.power()
        while True:
            t = self.peek()
            if t[1] == "*" and self._starts_factor(1):
                self.next()
                node = Node("mul", args=(node, self.power()), pos=t[2])
            elif self._starts_factor():
                node = Node("mul", args=(node, self.power()), pos=t[2])
            else:
                return node

    def power(self) -> Node:
        node = self.postfix()
        if self.peek()[1] == "^":
            t = self.next()
            if node.kind not in ("gen", "mu", "i", "sqrt", "num", "paren", "adj"):
                raise ParseError("power only applies to atoms", self.text, t[2])
            sign = 1
            if self.peek()[1] == "-":
                self.next()
                sign = -1
            e = self.next()
            if e[0] != "num":
                raise ParseError("expected an integer exponent", self.text, e[2])
            node = Node("pow", sign * int(e[1]), (node,), t[2])
        return node

    def postfix(self) -> Node:
        node = self.atom()
        while self.peek()[1] == "*" and not self._starts_factor(1):
            t = self.next()
            node = Node("adj", args=(node,), pos=t[2])
        return node

    def atom(self) -> Node:
        t = self.next()
        kind, val, pos = t
        if kind == "num":
            if self.peek()[1] == "/":
                self.next()
                d = self.next()
                if d[0] != "num":
                    raise ParseError("expected a denominator", self.text, d[2])
                return Node("num", Fraction(int(val), int(d[1])), pos=pos)
            return Node("num", Fraction(int(val)), pos=pos)
        if kind == "name":
            if val == "mu":
                return Node("mu", pos=pos)
            if val == "i":
                return Node("i", pos=pos)
            if val in ("sqrt", "d", "delta") and self.peek()[1] == "(":
                self.next()
                if val == "sqrt":
                    a = self.next()
                    if a[0] != "num":
                        raise ParseError("sqrt takes an integer", self.text, a[2])
                    self.expect(")")
                    return Node("sqrt", int(a[1]), pos=pos)
                inner = self.expr()
                self.expect(")")
                return Node(val, args=(inner,), pos=pos)
            return Node("gen", val, pos=pos)
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return Node("paren", args=(inner,), pos=pos)
        raise ParseError(f"unexpected {val or 'end of input'!r}", self.text, pos)


def parse(text: str, preset_name: str = "s7") -> Node:
    """Parse into an AST; generator names are checked against the preset
    (names of A(SU(2)) are accepted too, for tensor legs)."""
    node = Parser(text).parse()
    P = preset(preset_name)
    _check_names(node, P, text)
    return node


def _legs_for(P: Presentation) -> list:
    out = [P]
    if P.name != "su2":
        out.append(preset("su2"))
    return out


def _check_names(node: Node, P: Presentation, text: str):
    if node.kind == "gen":
        if not any(node.value in Q.gindex for Q in _legs_for(P)):
            raise UnknownGenerator(f"unknown generator {node.value!r} for {P.name} "
                                   f"at column {node.pos + 1}")
    for a in node.args:
        _check_names(a, P, text)


def evaluate(node: Node, preset_name: str = "s7"):
    P = preset(preset_name)
    return _eval(node, P, _legs_for(P))


def _eval(node: Node, P, spaces):
    k = node.kind
    if k == "num":
        return node.value
    if k == "mu":
        return Scalar.mu(1)
    if k == "i":
        return Scalar.i()
    if k == "sqrt":
        return Scalar.sqrt(node.value)
    if k == "gen":
        for Q in spaces:
            if node.value in Q.gindex:
                return Q.gen(node.value)
        raise UnknownGenerator(node.value)
    if k == "paren":
        return _eval(node.args[0], P, spaces)
    if k == "neg":
        return -_as_value(_eval(node.args[0], P, spaces))
    if k in ("add", "sub"):
        a = _eval(node.args[0], P, spaces)
        b = _eval(node.args[1], P, spaces)
        a, b = _align(a, b, P)
        return a + b if k == "add" else a - b
    if k == "mul":
        a = _eval(node.args[0], P, spaces)
        b = _eval(node.args[1], P, spaces)
        return _mul(a, b)
    if k == "pow":
        base = _eval(node.args[0], P, spaces)
        e = node.value
        if isinstance(base, Scalar) and e < 0:
            if base.is_monomial() and len(base._c) == 1:
                (mk, d, i), c = next(iter(base._c.items()))
                if d == 1 and i == 0 and c == 1:
                    return Scalar.mu(mk * e)
            raise PresentationError("negative powers only for mu")
        if isinstance(base, Fraction):
            return base ** e
        if e < 0:
            raise PresentationError("negative powers only for scalars")
        r = 1
        for _ in range(e):
            r = _mul(r, base)
        return r
    if k == "adj":
        v = _eval(node.args[0], P, spaces)
        if isinstance(v, Fraction):
            return v
        if isinstance(v, Scalar):
            return v.conj()
        return v.adjoint()
    if k in ("d", "delta"):
        v = _eval(node.args[0], P, spaces)
        cls = ExteriorForm if k == "d" else FirstOrderForm
        if isinstance(v, (Fraction, Scalar)):
            return cls.zero(P)
        if isinstance(v, AlgebraElement):
            return cls.differential(v)
        return v.d()
    if k == "tensor":
        legs = [_eval(a, P, spaces) for a in node.args]
        return _tensor(legs, P)
    raise PresentationError(f"cannot evaluate {k}")


def _as_value(v):
    return v


def _mul(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, (Fraction, int)) and isinstance(b, Scalar):
        return b * a
    if isinstance(a, Scalar) and isinstance(b, (Scalar, Fraction, int)):
        return a * b
    if isinstance(a, (Scalar, Fraction, int)) and isinstance(b, Tensor):
        return b.scale(a)
    if isinstance(a, Tensor) and isinstance(b, (Scalar, Fraction, int)):
        return a.scale(b)
    if isinstance(a, (Fraction, int, Scalar)):
        return b * a if not isinstance(b, (ExteriorForm, FirstOrderForm)) else b.__rmul__(a)
    return a * b


def _align(a, b, P):
    """Promote scalars so that sums of algebra elements, forms and tensors work."""
    scal = (Fraction, int, Scalar)
    if isinstance(a, Tensor) and isinstance(b, scal):
        b = _tensor([b] + [1] * (len(a.legs) - 1), P, a.legs)
    elif isinstance(b, Tensor) and isinstance(a, scal):
        a = _tensor([a] + [1] * (len(b.legs) - 1), P, b.legs)
    if isinstance(a, scal) and isinstance(b, scal):
        return Scalar(a) if not isinstance(a, Scalar) else a, b
    return a, b


def _tensor(legs, P, spaces=None):
    elems = []
    has_su2 = any(isinstance(v, AlgebraElement) and v.P.name == "su2" for v in legs)
    for i, v in enumerate(legs):
        if isinstance(v, AlgebraElement):
            elems.append(v)
            continue
        if not isinstance(v, (Fraction, int, Scalar)):
            raise PresentationError("tensor legs must be algebra elements or scalars")
        if spaces is not None:
            Q = spaces[i]
        elif i == 0:
            Q = P
        else:
            Q = preset("su2") if (has_su2 or P.name == "su2") else P
        elems.append(Q.one() * v)
    return tensor(*elems)


def render(value) -> str:
    if isinstance(value, (AlgebraElement, Tensor, ExteriorForm, FirstOrderForm)):
        return value.render()
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Scalar):
        return str(value)
    return str(value)


def evaluate_text(text: str, preset_name: str = "s7"):
    return evaluate(parse(text, preset_name), preset_name)


# -- reports ---------------------------------------------------------------------

def _report(command: str, args: dict, checks: dict, results: dict, t0: float,
            extra: dict | None = None) -> dict:
    rep = {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "arguments": args,
        "results": results,
        "checks": checks,
        "pass": all(v is True for v in checks.values()),
    }
    if extra:
        rep.update(extra)
    rep["timing_seconds"] = round(time.time() - t0, 3) if args.get("timings") else None
    return rep


def cmd_nf(a) -> dict:
    t0 = time.time()
    v = evaluate_text(a.expr, a.preset)
    out = render(v)
    checks = {}
    if a.expect is not None:
        w = evaluate_text(a.expect, a.preset)
        d = _align(v, w, preset(a.preset))
        diff = d[0] - d[1]
        checks["matches_expectation"] = (diff == 0) if isinstance(diff, (Fraction, int)) else \
            (diff.is_zero() if hasattr(diff, "is_zero") else diff == 0)
    return _report("nf", {"preset": a.preset, "expr": a.expr, "expect": a.expect,
                          "timings": a.timings},
                   checks, {"normal_form": out}, t0)


def cmd_projection(a) -> dict:
    from .fibration import matches_reference, projection
    t0 = time.time()
    pm = projection(a.n)
    checks = {"selfadjoint": pm.check_selfadjoint(),
              "idempotent": pm.check_idempotent(),
              "trace_is_n_plus_1": pm.trace() == pm.trace().P.one() * (a.n + 1)}
    if a.n <= 3:
        checks["coinvariant"] = pm.check_coinvariant()
    if a.n <= 2:
        checks["factorization"] = pm.check_factorization()
    if a.n == 1:
        checks["matches_reference"] = matches_reference()
    results = {"size": pm.size, "orbit_representatives": len(pm.reps)}
    if a.n == 1:
        results["entries"] = [[pm.entry_s4(i, j).render() for j in range(4)] for i in range(4)]
    return _report("projection", {"n": a.n, "timings": a.timings}, checks, results, t0)


def cmd_connection(a) -> dict:
    from .hopf_galois import compare_with_grassmannian
    t0 = time.time()
    r = compare_with_grassmannian(a.n, a.method)
    checks = {"omega_matches_grassmannian": all(r.values())}
    results = {f"A_{k + 1}{l + 1}": ok for (k, l), ok in sorted(r.items())}
    return _report("connection", {"n": a.n, "method": a.method, "timings": a.timings}, checks,
                   results, t0)


def cmd_chern(a) -> dict:
    from .chern_index import (NoProportionality, c_n, chern, clifford_proportionality,
                              proportionality, proportionality_exterior)
    from .first_order_calculus import fo_is_zero_in_quotient
    t0 = time.time()
    v = chern(a.k, a.n)
    results = {"k": a.k, "n": a.n, "normalized": True}
    checks = {}
    undecided = False
    if a.k == 0:
        results["value"] = v.form.render()
        checks["equals_n_plus_1"] = v.form == v.form.P.one() * (a.n + 1)
    elif a.k == 1:
        zt = fo_is_zero_in_quotient(v.form, 2 * a.k + 4, "oracle")
        results["zero_test"] = zt.verdict
        undecided = zt.verdict == "undecided"
        checks["vanishes"] = zt.verdict == "zero"
    else:
        form = v.form.canonical()
        results["terms"] = sum(len(t) for t in form._w.values())
        if a.show:
            results["value"] = form.render()
        try:
            results["c_n_omega_D"] = str(proportionality(a.n))
            checks["proportional_in_omega_D"] = True
        except NoProportionality as e:
            results["c_n_omega_D"] = None
            results["omega_D_note"] = str(e)
            checks["proportional_in_omega_D"] = False
        ce = proportionality_exterior(a.n)
        results["c_n_exterior"] = str(ce)
        checks["exterior_c_n"] = ce == c_n(a.n)
        cl = clifford_proportionality(a.n, samples=a.samples, seed=a.seed)
        results["clifford"] = {"max_residual": cl.max_residual, "tol": cl.tol,
                               "seed": cl.seed, "samples": cl.samples,
                               "gamma_coefficient_unnormalized": cl.gamma_coefficient.real}
        checks["clifford_image_proportional"] = cl.passed
    rep = _report("chern", {"k": a.k, "n": a.n, "timings": a.timings}, checks, results, t0)
    rep["undecided"] = undecided
    return rep


def cmd_index(a) -> dict:
    from .chern_index import c_n, index, proportionality_exterior
    t0 = time.time()
    if a.n <= 3:
        c = proportionality_exterior(a.n)
        source = "exterior"
    else:
        c = c_n(a.n)
        source = "closed form"
    ind = index(a.n, c)
    want = a.n * (a.n + 1) * (a.n + 2) // 6
    return _report("index", {"n": a.n, "timings": a.timings},
                   {"index_matches_closed_form": ind == want},
                   {"index": ind, "c_n": str(c), "c_n_source": source}, t0)


def cmd_asd(a) -> dict:
    from .fibration import S4, projection
    from .splitting_hodge import asd_residual
    t0 = time.time()
    pm = projection(a.n)
    p = [[pm.entry_s4(i, j) for j in range(pm.size)] for i in range(pm.size)]
    r = asd_residual(p, a.samples, a.seed, a.tol, a.n)
    pert = [row[:] for row in p]
    pert[0][0] = pert[0][0] + S4().gen("x") * Fraction(1, 10)
    neg = asd_residual(pert, min(a.samples, 20), a.seed, a.tol, a.n)
    pts = r.per_point
    results = {"max_residual": r.max_residual, "tol": a.tol, "seed": a.seed,
               "samples": a.samples,
               "per_point": {"min": min(pts), "max": max(pts), "mean": sum(pts) / len(pts)},
               "negative_control_residual": neg.max_residual}
    checks = {"anti_selfdual": r.passed, "negative_control_detected": neg.max_residual > 1e-3}
    return _report("asd", {"n": a.n, "samples": a.samples, "seed": a.seed, "tol": a.tol,
                           "timings": a.timings}, checks, results, t0)


def cmd_hopf_galois(a) -> dict:
    from .hopf_galois import galois_bijectivity_on_component, galois_witnesses, \
        strong_connection_axioms
    t0 = time.time()
    w = galois_witnesses()
    b = galois_bijectivity_on_component(bound=2)
    names = {(0, 0): "w1", (0, 1): "w2", (1, 0): "-wb2", (1, 1): "wb1"}
    results = {"witnesses": {f"<psi_{i + 1}| (x) |psi_{j + 1}>": {"chi": img.render(),
                                                               "expected": f"1 (x) {names[i, j]}"}
                             for (i, j), (img, _) in w.items()},
               "bijectivity": {"bound": b.bound, "source_dim": b.dim_source,
                               "relations_dim": b.dim_relations, "rank": b.rank_chi}}
    checks = {"witnesses": all(ok for _, ok in w.values()),
              "canonical_map_bijective": b.isomorphism}
    if a.degree > 0:
        s = strong_connection_axioms(a.degree, method=a.method)
        results["strong_connection"] = {"method": a.method, "checked": len(s.items),
                                        "failures": len(s.failures),
                                        "undecided": len(s.undecided),
                                        "first_failures": [str(f) for f in s.failures[:5]]}
        checks["strong_connection"] = s.passed
    return _report("hopf-galois", {"degree": a.degree, "method": a.method,
                                   "timings": a.timings}, checks, results, t0)


def cmd_classical_limit(a) -> dict:
    from .acceptance import classical_regressions
    t0 = time.time()
    checks, results = classical_regressions()
    return _report("classical-limit", {"timings": a.timings}, checks, results, t0)


def cmd_selftest(a) -> dict:
    from .acceptance import run_all
    t0 = time.time()
    rows = run_all(quick=a.quick)
    checks = {f"criterion_{r.number}": r.passed for r in rows}
    results = {f"criterion_{r.number}": {"title": r.title, "detail": r.detail} for r in rows}
    return _report("selftest", {"quick": a.quick, "timings": a.timings}, checks, results, t0)


COMMANDS = {
    "nf": cmd_nf, "projection": cmd_projection, "connection": cmd_connection,
    "chern": cmd_chern, "index": cmd_index, "asd": cmd_asd, "hopf-galois": cmd_hopf_galois,
    "classical-limit": cmd_classical_limit, "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncfib", description="Exact checks for the "
                                 "noncommutative Hopf fibration S^7 -> S^4.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--timings", action="store_true", help="include wall-clock timings")
        return p

    p = add("nf", help="normal form of an expression")
    p.add_argument("expr")
    p.add_argument("--preset", default="s7")
    p.add_argument("--expect", default=None, help="expression the result should equal")
    p = add("projection", help="laws of the projection p_(n)")
    p.add_argument("--n", type=int, default=1)
    p = add("connection", help="strong connection versus Grassmannian connection")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--method", default="recursive", choices=["recursive", "peter_weyl"])
    p = add("chern", help="Chern characters in Omega_D")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--show", action="store_true", help="include the full form")
    p = add("index", help="index of the twisted Dirac operator")
    p.add_argument("--n", type=int, default=1)
    p = add("asd", help="anti-selfduality of the curvature")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--tol", type=float, default=1e-9)
    p = add("hopf-galois", help="Galois witnesses, bijectivity and strong connection")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--method", default="recursive", choices=["recursive", "peter_weyl"])
    add("classical-limit", help="theta = 0 regressions")
    p = add("selftest", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="skip the slowest sizes")
    return ap


def _jsonable(o):
    if isinstance(o, (Fraction, Scalar)):
        return str(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if hasattr(o, "item"):
        return o.item()
    return str(o)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    try:
        rep = COMMANDS[a.command](a)
    except (ParseError, PresentationError, ValueError) as e:
        print(json.dumps({"schema": SCHEMA, "command": a.command, "error": str(e)}))
        return EXIT_USAGE
    print(json.dumps(rep, indent=2, sort_keys=True, default=_jsonable))
    if rep.get("undecided"):
        return EXIT_UNDECIDED
    return EXIT_PASS if rep["pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
