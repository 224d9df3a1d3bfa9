"""Canonical printers: text (parseable), JSON (schema ``holonomic/1``), LaTeX.

The text format uses the same syntax the parser accepts: ``*`` for products,
``^`` for integer powers, ``!`` for factorials.  Top-level sums are spaced
(``a + b - c``); parenthesized sums are not (``(k+1)*K``).
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import singledispatch

import sympy
from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .exact import frac_field, names_of, sort_symbols, to_frac, to_fraction
from .hypersum import (
    ClosedForm,
    GosperCertificate,
    IdentityProof,
    NoSolution,
    SymbolicProduct,
    ZeilbergerResult,
)
from .hyperterm import HyperTerm, TermRatio, TermSum
from .ode import AnnihilatorODE
from .ore import OrePoly, SumRecurrence, TermOrder
from .rec import AnnihilatorRec, shift_symbol
from .structrel import ShapeTerm, StructureRelation, VerificationReport

SCHEMA = "holonomic/1"
FORMATS = ("text", "json", "latex")


# --------------------------------------------------------------------------
# text helpers

def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def monomial_text(names, monom) -> str:
    parts = []
    for name, e in zip(names, monom):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def signed_terms(p: PolyElement, key=None) -> list[tuple[int, str]]:
    """(sign, text of |term|) for each term, in descending order."""
    names = names_of(p)
    items = list(p.terms())
    if key is not None:
        items.sort(key=lambda mc: key(mc[0]), reverse=True)
    out = []
    for monom, c in items:
        c = to_fraction(c)
        sign = -1 if c < 0 else 1
        c = abs(c)
        mono = monomial_text(names, monom)
        if not mono:
            body = _frac_text(c)
        elif c == 1:
            body = mono
        else:
            body = f"{_frac_text(c)}*{mono}"
        out.append((sign, body))
    return out


def join_terms(terms: list[tuple[int, str]], spaced: bool = True) -> str:
    if not terms:
        return "0"
    plus, minus = (" + ", " - ") if spaced else ("+", "-")
    first_sign, first = terms[0]
    out = ("-" if first_sign < 0 else "") + first
    for sign, body in terms[1:]:
        out += (minus if sign < 0 else plus) + body
    return out


def poly_text(p: PolyElement, spaced: bool = True, key=None) -> str:
    return join_terms(signed_terms(p, key), spaced)


def _is_atom(p: PolyElement) -> bool:
    """A single variable or a nonnegative integer: safe without parentheses."""
    if len(p) != 1:
        return False
    (monom, c), = p.items()
    c = to_fraction(c)
    if not any(monom):
        return c >= 0 and c.denominator == 1
    return c == 1 and sum(monom) == 1


def wrapped(p: PolyElement) -> str:
    s = poly_text(p, spaced=False)
    return s if _is_atom(p) else f"({s})"


def coeff_times(c: PolyElement, op: str) -> list[tuple[int, str]]:
    """Signed pieces for ``c * op``; an empty ``op`` expands ``c`` in place."""
    if not op:
        return signed_terms(c)
    if len(c) == 1:
        (sign, body), = signed_terms(c)
        return [(sign, op if body == "1" else f"{body}*{op}")]
    lead = signed_terms(c)[0][0]
    return [(lead, f"({poly_text(c * lead, spaced=False)})*{op}")]


def frac_text(f, spaced: bool = True) -> str:
    if isinstance(f, PolyElement):
        return poly_text(f, spaced)
    if f.denom == 1:
        return poly_text(f.numer, spaced)
    num, den = f.numer, f.denom
    if len(num) == 1:
        (sign, body), = signed_terms(num)
        head = ("-" if sign < 0 else "") + body
    else:
        head = f"({poly_text(num, spaced=False)})"
    return f"{head}/{wrapped(den)}"


def op_power(sym: str, e: int) -> str:
    return "" if e == 0 else sym if e == 1 else f"{sym}^{e}"


# --------------------------------------------------------------------------
# text

@singledispatch
def text(value) -> str:
    raise TypeError(f"cannot render {type(value).__name__}")


@text.register(int)
@text.register(Fraction)
def _(value) -> str:
    return _frac_text(Fraction(value))


@text.register(PolyElement)
def _(value) -> str:
    return poly_text(value)


@text.register(FracElement)
def _(value) -> str:
    return frac_text(value)


@text.register(list)
@text.register(tuple)
def _(value) -> str:
    return "\n".join(text(v) for v in value)


def render_rec(R: AnnihilatorRec) -> str:
    sym = shift_symbol(R.var)
    pieces = []
    for j in reversed(range(len(R.coeffs))):
        if R.coeffs[j]:
            pieces += coeff_times(R.coeffs[j], op_power(sym, j))
    return join_terms(pieces)


def render_ode(A: AnnihilatorODE) -> str:
    pieces = []
    for j in reversed(range(len(A.coeffs))):
        if A.coeffs[j]:
            pieces += coeff_times(A.coeffs[j], op_power("D", j))
    out = join_terms(pieces)
    if A.inhom is not None:
        out += " = " + poly_text(A.inhom)
    return out


text.register(AnnihilatorRec, render_rec)
text.register(AnnihilatorODE, render_ode)


def _factor_pieces(t: HyperTerm) -> tuple[list[str], list[str]]:
    num, den = [], []
    for form, e in t.factorials:
        base = f"{wrapped(form)}!"
        piece = base if abs(e) == 1 else f"{base}^{abs(e)}"
        (num if e > 0 else den).append(piece)
    for base, expo in t.geometric:
        if isinstance(base, str):
            b = base
        elif base.denominator == 1 and base > 0:
            b = str(base)
        else:
            b = f"({_frac_text(base)})"
        num.append(f"{b}^{wrapped(expo)}")
    return num, den


def render_term(t) -> str:
    if isinstance(t, TermSum):
        if not t.terms:
            return "0"
        pieces = []
        for term in t.terms:
            lead = term.rational.numer.LC
            if lead < 0:
                pieces.append((-1, render_term(-term)))
            else:
                pieces.append((1, render_term(term)))
        return join_terms(pieces)
    num, den = _factor_pieces(t)
    r = t.rational
    sign = ""
    numer = r.numer
    if numer.LC < 0:
        sign, numer = "-", -numer
    if numer != 1 or not num:
        num.insert(0, wrapped(numer) if num or len(numer) > 1 else poly_text(numer, spaced=False))
    if r.denom != 1:
        den.insert(0, wrapped(r.denom))
    out = sign + "*".join(num)
    if den:
        out += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    return out


text.register(HyperTerm, render_term)
text.register(TermSum, render_term)


def _ore_groups(p: OrePoly, order: TermOrder | None):
    """[(operator exponent dict, coefficient poly over vars+params)] in display order."""
    alg = p.algebra
    if order is None:
        order = TermOrder.lex(*(o.name for o in alg.operators), *alg.commutative)
    key = order.key_for(alg)
    nc = len(alg.commutative)
    names = sort_symbols(set(alg.commutative) | set(alg.params))
    F = frac_field(names)
    groups: dict = {}
    for m in sorted(p.terms, key=key, reverse=True):
        op = m[nc:]
        comm = F.one
        for v, e in zip(alg.commutative, m[:nc]):
            if e:
                comm *= F.gens[names.index(v)] ** e
        c = p.terms[m]
        c = to_frac(c, names) if alg.params else F(c)
        groups[op] = groups.get(op, F.zero) + c * comm
    ops = [o.name for o in alg.operators]
    op_rank = [ops.index(v) for v in (order.priority or ()) if v in ops]
    op_rank += [i for i in range(len(ops)) if i not in op_rank]
    cidx = [names.index(v) for v in ([v for v in order.priority if v in alg.commutative]
                                     + [v for v in alg.commutative if v not in order.priority])]
    pidx = [names.index(v) for v in alg.params]

    def mono_key(mon):
        return tuple(mon[i] for i in cidx) + (sum(mon[i] for i in pidx),) + tuple(mon[i] for i in pidx)

    out = []
    for op, coeff in groups.items():
        opstr = "*".join(op_power(ops[i], op[i]) for i in op_rank if op[i])
        out.append((opstr, coeff, mono_key))
    return out


def render_ore(p: OrePoly, order: TermOrder | None = None) -> str:
    if not p:
        return "0"
    pieces = []
    for opstr, coeff, mono_key in _ore_groups(p, order):
        if coeff.denom == 1:
            c = coeff.numer
            if not opstr:
                pieces += signed_terms(c, mono_key)
            elif len(c) == 1:
                (sign, body), = signed_terms(c)
                pieces.append((sign, opstr if body == "1" else f"{body}*{opstr}"))
            else:
                lead = signed_terms(c, mono_key)[0][0]
                pieces.append((lead, f"({poly_text(c * lead, spaced=False, key=mono_key)})*{opstr}"))
        else:
            body = frac_text(coeff, spaced=False)
            pieces.append((1, f"({body})*{opstr}" if opstr else body))
    return join_terms(pieces)


text.register(OrePoly, lambda p: render_ore(p))


# --------------------------------------------------------------------------
# LaTeX

def to_sympy(p):
    if isinstance(p, FracElement):
        return sympy.factor(p.as_expr())
    if isinstance(p, PolyElement):
        return sympy.factor(p.as_expr())
    if isinstance(p, Fraction):
        return sympy.Rational(p.numerator, p.denominator)
    return sympy.sympify(p)


def term_sympy(t):
    if isinstance(t, TermSum):
        return sympy.Add(*(term_sympy(s) for s in t.terms), evaluate=False)
    out = [to_sympy(t.rational)]
    for form, e in t.factorials:
        out.append(sympy.factorial(form.as_expr()) ** e)
    for base, expo in t.geometric:
        b = sympy.Symbol(base) if isinstance(base, str) else to_sympy(base)
        out.append(sympy.Pow(b, expo.as_expr(), evaluate=False))
    return sympy.Mul(*out)


@singledispatch
def latex(value) -> str:
    return sympy.latex(to_sympy(value))


@latex.register(AnnihilatorRec)
def _(R) -> str:
    n = sympy.Symbol(R.var)
    s = sympy.Function("s")
    expr = sum((to_sympy(c) * s(n + j) for j, c in enumerate(R.coeffs) if c), sympy.Integer(0))
    return sympy.latex(expr) + " = 0"


@latex.register(AnnihilatorODE)
def _(A) -> str:
    x = sympy.Symbol(A.var)
    f = sympy.Function("f")(x)
    expr = sum((to_sympy(c) * (f.diff(x, j) if j else f) for j, c in enumerate(A.coeffs) if c),
               sympy.Integer(0))
    rhs = to_sympy(A.inhom) if A.inhom is not None else 0
    return sympy.latex(expr) + " = " + sympy.latex(rhs)


@latex.register(HyperTerm)
@latex.register(TermSum)
def _(t) -> str:
    return sympy.latex(term_sympy(t))


@latex.register(list)
@latex.register(tuple)
def _(value) -> str:
    return ",\\quad ".join(latex(v) for v in value)


# --------------------------------------------------------------------------
# JSON

@singledispatch
def to_json(value):
    raise TypeError(f"cannot serialize {type(value).__name__}")


@to_json.register(int)
@to_json.register(Fraction)
def _(value):
    return {"type": "rational", "value": _frac_text(Fraction(value))}


@to_json.register(PolyElement)
@to_json.register(FracElement)
def _(value):
    return {"type": "ratfunc", "value": frac_text(value)}


@to_json.register(list)
@to_json.register(tuple)
def _(value):
    return [to_json(v) for v in value]


@to_json.register(AnnihilatorRec)
def _(R):
    return {"type": "recurrence", "var": R.var, "order": R.order,
            "coeffs": [poly_text(c) for c in R.coeffs], "text": render_rec(R)}


@to_json.register(AnnihilatorODE)
def _(A):
    return {"type": "ode", "var": A.var, "order": A.order,
            "coeffs": [poly_text(c) for c in A.coeffs],
            "inhom": None if A.inhom is None else poly_text(A.inhom), "text": render_ode(A)}


@to_json.register(OrePoly)
def _(p):
    alg = p.algebra
    return {"type": "ore", "vars": list(alg.vars), "params": list(alg.params), "text": render_ore(p)}


@latex.register(OrePoly)
def _(p) -> str:
    expr = sympy.sympify(render_ore(p).replace("^", "**"), locals={v: sympy.Symbol(v) for v in p.algebra.vars})
    return sympy.latex(expr)


@to_json.register(HyperTerm)
@to_json.register(TermSum)
def _(t):
    return {"type": "term", "text": render_term(t)}


# --------------------------------------------------------------------------
# results

def _derivative_text(t: ShapeTerm, n: str) -> str:
    arg = n if t.shift == 0 else f"{n}{'+' if t.shift > 0 else '-'}{abs(t.shift)}"
    marks = "'" * t.derivative if t.derivative <= 3 else f"^({t.derivative})"
    return f"F{marks}({arg})"


def _shape_piece(t: ShapeTerm, c, n: str) -> tuple[int, str]:
    """Signed text for c * multiplier * F^(j)(n+s)."""
    names = sort_symbols(set(names_of(c)) | set(names_of(t.multiplier)) | {n})
    f = to_frac(c, names) * to_frac(t.multiplier, names)
    sign = 1
    if f.numer.LC < 0:
        sign, f = -1, -f
    body = _derivative_text(t, n)
    if f == 1:
        return sign, body
    if f.denom == 1:
        return sign, f"{wrapped(f.numer)}*{body}"
    return sign, f"({frac_text(f, spaced=False)})*{body}"


def render_relation(rel: StructureRelation) -> str:
    fixed = next((t for t in rel.terms if t.fixed), None)
    rhs = rel.rhs()
    if fixed is None or not rhs:
        pieces = [_shape_piece(t, c, rel.n) for t, c in zip(rel.terms, rel.coeffs) if c]
        return join_terms(pieces) + " = 0"
    lead = _shape_piece(fixed, 1, rel.n)[1]
    pieces = [_shape_piece(t, rhs[(t.derivative, t.shift)], rel.n)
              for t in rel.terms if (t.derivative, t.shift) in rhs]
    return f"{lead} = {join_terms(pieces)}"


def _index_text(var: str, modulus: int, start: int) -> str:
    lin = poly_text(frac_field((var,)).ring.gens[0] * modulus + start, spaced=False)
    return f"a({lin})"


def render_closed_form(cf: ClosedForm) -> str:
    lines = []
    for cls in cf.classes:
        for idx, v in cls.explicit:
            lines.append(f"a({idx}) = {_frac_text(Fraction(v))}")
        lhs = _index_text(cf.var, cf.modulus, cls.start)
        if isinstance(cls.term, SymbolicProduct):
            rhs = f"{_frac_text(cls.term.value)}*product({frac_text(cls.term.ratio, spaced=False)}, {cls.term.var})"
        else:
            rhs = render_term(cls.term)
        lines.append(f"{lhs} = {rhs}  ({cf.var} >= 0)")
    return "\n".join(lines)


def render_proof(p: IdentityProof) -> str:
    lines = [f"verdict: {p.verdict}"]
    if p.recurrence is not None:
        lines.append(f"recurrence: {render_rec(p.recurrence)}")
    else:
        for side, R in (("lhs", p.lhs_recurrence), ("rhs", p.rhs_recurrence)):
            if R is not None:
                lines.append(f"{side} recurrence: {render_rec(R)}")
    if p.checked:
        lines.append("initial values: " + ", ".join(f"s({i}) = {_frac_text(Fraction(v))}" for i, v in p.checked))
    if p.reason:
        lines.append(f"reason: {p.reason}")
    return "\n".join(lines)


text.register(StructureRelation, render_relation)
text.register(ClosedForm, render_closed_form)
text.register(IdentityProof, render_proof)
text.register(NoSolution, lambda v: f"no solution: {v.reason}")
text.register(GosperCertificate,
              lambda g: f"certificate: {frac_text(g.rational)}\nantidifference: {render_term(g.antidifference())}")
text.register(ZeilbergerResult,
              lambda z: f"recurrence: {render_rec(z.recurrence)}\ncertificate: {frac_text(z.certificate)}\norder: {z.order}")
text.register(SumRecurrence,
              lambda s: f"recurrence: {render_rec(s.recurrence)}\noperator: {render_ore(s.operator)}")
text.register(TermRatio, lambda r: f"{r.var}: {frac_text(r.ratio)}")
text.register(VerificationReport,
              lambda v: f"{'ok' if v.ok else 'FAILED'}: max residue {_frac_text(v.max_residue)} over {v.checked} points")
text.register(dict, lambda d: "\n".join(f"{k}: {text(v)}" for k, v in d.items()))
text.register(str, lambda s: s)


@to_json.register(NoSolution)
def _(v):
    return {"type": "no_solution", "reason": v.reason}


@to_json.register(GosperCertificate)
def _(g):
    return {"type": "gosper", "var": g.var, "certificate": frac_text(g.rational),
            "term": render_term(g.term), "antidifference": render_term(g.antidifference())}


@to_json.register(ZeilbergerResult)
def _(z):
    return {"type": "zeilberger", "n": z.n, "k": z.k, "order": z.order,
            "recurrence": to_json(z.recurrence), "certificate": frac_text(z.certificate),
            "term": render_term(z.term)}


@to_json.register(IdentityProof)
def _(p):
    opt = lambda R: None if R is None else to_json(R)  # noqa: E731
    return {"type": "proof", "verdict": p.verdict, "recurrence": opt(p.recurrence),
            "lhs_recurrence": opt(p.lhs_recurrence), "rhs_recurrence": opt(p.rhs_recurrence),
            "initial_values": [[i, _frac_text(Fraction(v))] for i, v in p.checked], "reason": p.reason}


@to_json.register(ClosedForm)
def _(cf):
    classes = []
    for cls in cf.classes:
        term = cls.term
        classes.append({
            "residue": cls.residue, "start": cls.start,
            "explicit": [[i, _frac_text(Fraction(v))] for i, v in cls.explicit],
            "term": render_term(term) if isinstance(term, HyperTerm) else None,
            "product": None if not isinstance(term, SymbolicProduct)
            else {"value": _frac_text(term.value), "ratio": frac_text(term.ratio)},
        })
    return {"type": "closed_form", "var": cf.var, "modulus": cf.modulus, "classes": classes,
            "text": render_closed_form(cf)}


@to_json.register(StructureRelation)
def _(rel):
    return {"type": "structure_relation", "n": rel.n, "var": rel.var,
            "terms": [{"derivative": t.derivative, "shift": t.shift, "multiplier": text_any(t.multiplier),
                       "fixed": t.fixed, "coeff": text_any(c)} for t, c in zip(rel.terms, rel.coeffs)],
            "text": render_relation(rel)}


@to_json.register(SumRecurrence)
def _(s):
    return {"type": "sum_recurrence", "recurrence": to_json(s.recurrence), "operator": render_ore(s.operator)}


@to_json.register(TermRatio)
def _(r):
    return {"type": "ratio", "var": r.var, "ratio": frac_text(r.ratio)}


@to_json.register(VerificationReport)
def _(v):
    return {"type": "verification", "ok": v.ok, "max_residue": _frac_text(v.max_residue),
            "checked": v.checked, "skipped": list(v.skipped)}


@to_json.register(dict)
def _(d):
    return {str(k): to_json(v) for k, v in d.items()}


@to_json.register(str)
def _(s):
    return s


def text_any(v) -> str:
    if isinstance(v, (PolyElement, FracElement)):
        return frac_text(v)
    return _frac_text(Fraction(v))


@latex.register(ZeilbergerResult)
def _(z):
    return latex(z.recurrence)


@latex.register(SumRecurrence)
def _(s):
    return latex(s.recurrence)


@latex.register(GosperCertificate)
def _(g):
    return latex(g.antidifference())


@latex.register(Fraction)
@latex.register(int)
def _(v):
    return sympy.latex(sympy.Rational(Fraction(v).numerator, Fraction(v).denominator))


@latex.register(StructureRelation)
def _(rel):
    return text(rel)


def render(value, fmt: str = "text") -> str:
    if fmt == "text":
        return text(value)
    if fmt == "latex":
        return latex(value)
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, "result": to_json(value)}, indent=2, sort_keys=True)
    raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


def _register_system():
    from .parser import SystemFile, render_system

    text.register(SystemFile, render_system)

    @to_json.register(SystemFile)
    def _(sf):
        alg = sf.algebra
        order = None
        if sf.order is not None:
            order = {"kind": sf.order.kind, "priority": list(sf.order.priority),
                     "blocks": [list(b) for b in sf.order.blocks]}
        return {"type": "system", "vars": list(alg.commutative),
                "ops": [{"name": o.name, "kind": o.kind, "var": o.var} for o in alg.operators],
                "params": list(alg.params), "order": order,
                "operators": [render_ore(p, sf.order) for p in sf.operators]}

    @latex.register(SystemFile)
    def _(sf):
        return ",\\quad ".join(latex(p) for p in sf.operators)


_register_system()
