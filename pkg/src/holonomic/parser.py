"""Expression language: tokenizer, recursive-descent parser and lowering.

Grammar (``^`` binds tighter than unary minus, ``!`` tighter than ``^``)::

    equation := expr ['=' expr]
    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := postfix ['^' exponent]
    exponent := ['-'] INT | postfix
    postfix  := primary '!'*
    primary  := INT | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy.polys.fields import FracElement

from .exact import diff, frac_field, gen, names_of, substitute, sort_symbols, to_frac, to_fraction, to_qq, used_symbols
from .hyperterm import HyperTerm, TermSum
from .ode import AnnihilatorODE
from .ore import Operator, OreAlgebra, OrePoly, TermOrder
from .rec import AnnihilatorRec, shift_symbol


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: Sequence[str] = ()):
        self.line, self.col = line, col
        self.expected = tuple(sorted(set(expected)))
        self.message = message
        detail = f"; expected {' or '.join(self.expected)}" if self.expected else ""
        super().__init__(f"line {line}, col {col}: {message}{detail}")


class LoweringError(ValueError):
    """An expression outside the admissible class for the requested lowering."""


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: object


@dataclass(frozen=True)
class Fact:
    arg: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    lhs: object
    rhs: object


def _atomic(e) -> str:
    s = show(e)
    return s if isinstance(e, (Num, Sym, Call)) or s.startswith("(") else f"({s})"


def show(e) -> str:
    """Compact source-like text of an AST node (for error messages)."""
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        return f"-{show(e.arg)}"
    if isinstance(e, BinOp):
        return f"({show(e.left)}{e.op}{show(e.right)})"
    if isinstance(e, Pow):
        return f"{_atomic(e.base)}^{_atomic(e.exp)}"
    if isinstance(e, Fact):
        return f"{_atomic(e.arg)}!"
    if isinstance(e, Call):
        return f"{e.name}({','.join(show(a) for a in e.args)})"
    if isinstance(e, Eq):
        return f"{show(e.lhs)} = {show(e.rhs)}"
    return repr(e)


# --------------------------------------------------------------------------
# tokenizer and parser

TOKEN = re.compile(r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<int>\d+)|(?P<name>[^\W\d]\w*'*)|(?P<op>[-+*/^!(),=])")


@dataclass(frozen=True)
class Token:
    kind: str  # int, name, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1) -> list[Token]:
    out = []
    pos, col = 0, 1
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind != "ws":
                out.append(Token(kind, s, line, col))
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class Parser:
    def __init__(self, text: str, line: int = 1):
        self.toks = tokenize(text, line)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, expected: Sequence[str]):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.line, t.col, expected)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail([repr(text)])

    def parse(self, equation: bool = True):
        e = self.expr()
        if equation and self.accept("="):
            e = Eq(e, self.expr())
        if self.tok.kind != "eof":
            self.fail(["operator", "end of input"] + (["'='"] if equation else []))
        return e

    def expr(self):
        e = self.term()
        while True:
            if self.accept("+"):
                e = BinOp("+", e, self.term())
            elif self.accept("-"):
                e = BinOp("-", e, self.term())
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            if self.accept("*"):
                e = BinOp("*", e, self.unary())
            elif self.accept("/"):
                e = BinOp("/", e, self.unary())
            else:
                return e

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.postfix()
        if self.accept("^"):
            if self.accept("-"):
                if self.tok.kind != "int":
                    self.fail(["integer"])
                v = int(self.tok.text)
                self.i += 1
                exp = Num(Fraction(-v))
            else:
                exp = self.postfix()
            if self.tok.kind == "op" and self.tok.text == "^":
                t = self.tok
                raise ParseError("chained powers need parentheses", t.line, t.col)
            return Pow(base, exp)
        return base

    def postfix(self):
        e = self.primary()
        while self.accept("!"):
            e = Fact(e)
        return e

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return Num(Fraction(int(t.text)))
        if t.kind == "name":
            self.i += 1
            if self.accept("("):
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                if not self.accept(")"):
                    self.fail(["')'", "','"])
                return Call(t.text, tuple(args))
            return Sym(t.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.fail(["number", "name", "'('", "'-'"])


def parse(text: str, line: int = 1, equation: bool = True):
    """Parse text into an AST; raises ``ParseError`` with position info."""
    return Parser(text, line).parse(equation)


def symbols(e) -> set[str]:
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, (Neg, Fact)):
        return symbols(e.arg)
    if isinstance(e, (BinOp, Pow)):
        return symbols(getattr(e, "left", getattr(e, "base", None))) | \
            symbols(getattr(e, "right", getattr(e, "exp", None)))
    if isinstance(e, Call):
        return set().union(*(symbols(a) for a in e.args))
    if isinstance(e, Eq):
        return symbols(e.lhs) | symbols(e.rhs)
    return set()


# --------------------------------------------------------------------------
# lowering to rational functions

def lower_rational(e, names: Sequence[str] | None = None) -> FracElement:
    """Rational function in the expression's symbols (no factorials, no symbolic powers)."""
    names = sort_symbols(set(names or ()) | symbols(e))
    F = frac_field(names) if names else frac_field(("n",))

    def go(e):
        if isinstance(e, Num):
            return F(to_qq(e.value))
        if isinstance(e, Sym):
            return F(F.ring.gens[names.index(e.name)])
        if isinstance(e, Neg):
            return -go(e.arg)
        if isinstance(e, BinOp):
            a, b = go(e.left), go(e.right)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if not b:
                raise LoweringError("division by zero")
            return a / b
        if isinstance(e, Pow):
            k = _int_exponent(e.exp)
            if k is None:
                raise LoweringError(f"exponent must be an integer literal: {show(e)}")
            return go(e.base) ** k
        raise LoweringError(f"not a rational function: {show(e)}")

    return go(e)


def _int_exponent(e) -> int | None:
    if isinstance(e, Num) and e.value.denominator == 1:
        return int(e.value)
    if isinstance(e, Neg) and isinstance(e.arg, Num) and e.arg.value.denominator == 1:
        return -int(e.arg.value)
    return None


# --------------------------------------------------------------------------
# lowering to hypergeometric terms

def lower(e) -> TermSum:
    """Lower to a sum of hypergeometric terms (binomials become factorials)."""
    if isinstance(e, Eq):
        raise LoweringError("an equation is not a term")
    names = sort_symbols(symbols(e))

    def poly_of(ts: TermSum, what):
        if len(ts.terms) == 0:
            return frac_field(names or ("n",)).ring.zero
        t = ts.single() if len(ts.terms) == 1 else None
        if t is None or t.factorials or t.geometric or used_symbols(t.rational.denom):
            raise LoweringError(f"not in the admissible term class: {show(what)} must be a polynomial")
        return t.rational.numer * to_qq(1 / to_fraction(t.rational.denom))

    def go(e) -> TermSum:
        if isinstance(e, Num):
            return TermSum.of(HyperTerm.const(e.value))
        if isinstance(e, Sym):
            F = frac_field(names)
            return TermSum.of(HyperTerm.rat(F(F.ring.gens[names.index(e.name)])))
        if isinstance(e, Neg):
            return -go(e.arg)
        if isinstance(e, BinOp):
            a, b = go(e.left), go(e.right)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if len(b.terms) != 1:
                raise LoweringError(f"not in the admissible term class: cannot divide by the sum {show(e.right)}")
            return a / b
        if isinstance(e, Fact):
            return TermSum.of(HyperTerm.fact(_linear(poly_of(go(e.arg), e.arg), e)))
        if isinstance(e, Call):
            if e.name == "binomial" and len(e.args) == 2:
                a, b = (_linear(poly_of(go(x), x), e) for x in e.args)
                return TermSum.of(HyperTerm.binomial(a, b))
            raise LoweringError(f"not in the admissible term class: {show(e)}")
        if isinstance(e, Pow):
            k = _int_exponent(e.exp)
            if k is not None:
                base = go(e.base)
                if k < 0 and len(base.terms) != 1:
                    raise LoweringError(f"not in the admissible term class: negative power of a sum {show(e)}")
                return base ** k
            expo = poly_of(go(e.exp), e.exp)
            if isinstance(e.base, Sym):
                return TermSum.of(HyperTerm.power(e.base.name, expo))
            try:
                c = lower_rational(e.base)
            except LoweringError:
                c = None
            if c is not None and not used_symbols(c):
                return TermSum.of(HyperTerm.power(to_fraction(c), expo))
            raise LoweringError(f"not in the admissible term class: base of {show(e)} must be a number or a symbol")
        raise LoweringError(f"not in the admissible term class: {show(e)}")

    try:
        return go(e)
    except ValueError as err:
        if isinstance(err, LoweringError):
            raise
        raise LoweringError(f"not in the admissible term class: {err}") from err


def _linear(p, where):
    for monom, c in p.items():
        if sum(monom) > 1:
            raise LoweringError(f"not in the admissible term class: nonlinear argument in {show(where)}")
    return p


def parse_term(text: str) -> TermSum:
    return lower(parse(text, equation=False))


# --------------------------------------------------------------------------
# lowering to operators

def lower_ore(e, alg: OreAlgebra) -> OrePoly:
    """Operator polynomial in ``alg``; products keep their written order."""
    if isinstance(e, Eq):
        raise LoweringError("an equation is not an operator")

    def go(e) -> OrePoly:
        if isinstance(e, Num):
            return alg.const(e.value)
        if isinstance(e, Sym):
            if e.name in alg.index or e.name in alg.params:
                return alg.gen(e.name)
            raise LoweringError(f"unknown symbol {e.name!r}; declare it as a variable, operator or parameter")
        if isinstance(e, Neg):
            return -go(e.arg)
        if isinstance(e, BinOp):
            if e.op == "/":
                if symbols(e.right) - set(alg.params):
                    raise LoweringError(f"can only divide by numbers and parameters: {show(e)}")
                d = lower_rational(e.right, alg.params)
                if not d:
                    raise LoweringError("division by zero")
                return go(e.left) * alg.const(d ** -1 if alg.params else 1 / to_fraction(d))
            a, b = go(e.left), go(e.right)
            return a + b if e.op == "+" else a - b if e.op == "-" else a * b
        if isinstance(e, Pow):
            k = _int_exponent(e.exp)
            if k is None or k < 0:
                raise LoweringError(f"operator exponents must be nonnegative integer literals: {show(e)}")
            return go(e.base) ** k
        raise LoweringError(f"not an operator polynomial: {show(e)}")

    return go(e)


def parse_ore(text: str, alg: OreAlgebra, line: int = 1) -> OrePoly:
    return lower_ore(parse(text, line, equation=False), alg)


def operator_coeffs(p: OrePoly, opname: str) -> list:
    """Coefficients of op^j (as rational functions) of an operator in one operator."""
    alg = p.algebra
    names = sort_symbols(set(alg.commutative) | set(alg.params))
    F = frac_field(names)
    coeffs: dict = {}
    for m, c in p.terms.items():
        mono = F.one
        for v, d in zip(alg.vars, m):
            if d and v != opname:
                mono *= F.gens[names.index(v)] ** d
        c = to_frac(c, names) if alg.params else F(c)
        j = m[alg.index[opname]]
        coeffs[j] = coeffs.get(j, F.zero) + c * mono
    if not coeffs:
        raise LoweringError("the zero operator annihilates nothing useful")
    return [coeffs.get(j, F.zero) for j in range(max(coeffs) + 1)]


def _single_operator_algebra(e, var: str, opname: str, kind: str) -> OreAlgebra:
    syms = symbols(e) - {var, opname}
    return OreAlgebra((var,), [Operator(opname, kind, var)], sorted(syms))


def parse_rec(text: str, var: str = "n") -> AnnihilatorRec:
    """Recurrence operator in the shift ``shift_symbol(var)``, e.g. ``(n+1)*N - 4*n - 2``."""
    e = parse(text, equation=False)
    op = shift_symbol(var)
    alg = _single_operator_algebra(e, var, op, "shift")
    return AnnihilatorRec(var, operator_coeffs(lower_ore(e, alg), op))


def parse_ode(text: str, var: str = "x") -> AnnihilatorODE:
    """Differential operator in ``D``, optionally ``= rhs`` for an inhomogeneous equation."""
    e = parse(text)
    lhs, rhs = (e.lhs, e.rhs) if isinstance(e, Eq) else (e, None)
    alg = _single_operator_algebra(lhs, var, "D", "diff")
    coeffs = operator_coeffs(lower_ore(lhs, alg), "D")
    inhom = None
    if rhs is not None:
        if "D" in symbols(rhs):
            raise LoweringError("the right-hand side must not contain D")
        inhom = lower_rational(rhs, names_of(coeffs[0]))
    return AnnihilatorODE(var, coeffs, inhom)


# --------------------------------------------------------------------------
# expressions linear in F^(j)(n+s)

def linear_in_calls(e, fname: str = "F", n: str = "n") -> dict:
    """{(j, s): coefficient} for an expression linear in calls like F''(n+1)."""
    slots: dict = {}

    def rewrite(e):
        if isinstance(e, Call) and e.name.rstrip("'") == fname:
            j = len(e.name) - len(fname)
            if len(e.args) != 1:
                raise LoweringError(f"{show(e)} takes one argument")
            arg = lower_rational(e.args[0], (n,))
            off = arg - arg.field(gen(arg.field.ring, n))
            if used_symbols(off):
                raise LoweringError(f"argument of {show(e)} must be {n} plus an integer")
            s = to_fraction(off)
            if s.denominator != 1:
                raise LoweringError(f"argument of {show(e)} must be {n} plus an integer")
            name = f"_{fname}{j}_{'m' if s < 0 else ''}{abs(int(s))}"
            slots[name] = (j, int(s))
            return Sym(name)
        if isinstance(e, Neg):
            return Neg(rewrite(e.arg))
        if isinstance(e, BinOp):
            return BinOp(e.op, rewrite(e.left), rewrite(e.right))
        if isinstance(e, Pow):
            return Pow(rewrite(e.base), e.exp)
        if isinstance(e, Call):
            return Call(e.name, tuple(rewrite(a) for a in e.args))
        return e

    f = lower_rational(rewrite(e))
    out = {}
    rest = f
    for name, key in slots.items():
        c = diff(f, name)
        if used_symbols(c) & set(slots):
            raise LoweringError(f"expression is not linear in {fname}")
        out[key] = out.get(key, 0) + c
        rest = substitute(rest, {name: 0})
    if rest:
        raise LoweringError(f"expression has a term without {fname}: {show(e)}")
    return out


# --------------------------------------------------------------------------
# annihilator-system files

@dataclass
class SystemFile:
    """Header-declared Ore algebra, optional term order and operator lines."""
    algebra: OreAlgebra
    order: TermOrder | None
    operators: list


HEADER = ("vars", "ops", "params", "order")
OP_DECL = re.compile(r"^\s*(\w+)\s*=\s*(shift|diff)\s*\(\s*(\w+)\s*\)\s*$")


def parse_order(kind: str, spec: str) -> TermOrder:
    """``lex`` with a comma list, or ``block`` with '|'-separated comma lists."""
    if kind == "lex":
        return TermOrder.lex(*_names(spec))
    if kind == "block":
        return TermOrder.block(*(_names(b) for b in spec.split("|")))
    raise ValueError(f"unknown order kind {kind!r}; expected lex or block")


def _names(spec: str) -> list[str]:
    return [s.strip() for s in spec.split(",") if s.strip()]


def parse_system(text: str) -> SystemFile:
    """Parse the line-oriented system format::

        # comment
        vars n, k
        ops N = shift(n), K = shift(k)
        params x
        order lex k, n, K, N
        K*N - 1 - K
    """
    decl: dict = {}
    body = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head in HEADER and not body:
            if head in decl:
                raise ParseError(f"duplicate {head} declaration", lineno, 1)
            decl[head] = (rest.strip(), lineno)
        else:
            body.append((line, lineno, raw.index(line[0]) + 1))
    if "vars" not in decl:
        raise ParseError("missing 'vars' header", 1, 1, ["'vars'"])
    ops = []
    if "ops" in decl:
        spec, lineno = decl["ops"]
        for piece in _split_ops(spec):
            m = OP_DECL.match(piece)
            if not m:
                raise ParseError(f"bad operator declaration {piece.strip()!r}", lineno, 1,
                                 ["NAME = shift(var)", "NAME = diff(var)"])
            ops.append(Operator(*m.groups()))
    params = _names(decl["params"][0]) if "params" in decl else []
    try:
        alg = OreAlgebra(_names(decl["vars"][0]), ops, params)
    except ValueError as err:
        raise ParseError(str(err), decl["vars"][1], 1) from err
    order = None
    if "order" in decl:
        spec, lineno = decl["order"]
        kind, _, names = spec.partition(" ")
        try:
            order = parse_order(kind, names)
            order.key_for(alg)
        except ValueError as err:
            raise ParseError(str(err), lineno, 1) from err
    polys = []
    for line, lineno, col in body:
        try:
            polys.append(lower_ore(parse(" " * (col - 1) + line, lineno, equation=False), alg))
        except LoweringError as err:
            raise ParseError(str(err), lineno, col) from err
    return SystemFile(alg, order, polys)


def _split_ops(spec: str) -> list[str]:
    # split on commas outside parentheses
    out, depth, cur = [], 0, ""
    for ch in spec:
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    return out + [cur] if cur.strip() else out


def render_system(sf: SystemFile) -> str:
    from .render import render_ore
    alg = sf.algebra
    lines = [f"vars {', '.join(alg.commutative)}"]
    if alg.operators:
        lines.append("ops " + ", ".join(f"{o.name} = {o.kind}({o.var})" for o in alg.operators))
    if alg.params:
        lines.append(f"params {', '.join(alg.params)}")
    if sf.order is not None:
        if sf.order.kind == "lex":
            lines.append(f"order lex {', '.join(sf.order.priority)}")
        else:
            lines.append("order block " + " | ".join(", ".join(b) for b in sf.order.blocks))
    lines += [render_ore(p, sf.order) for p in sf.operators]
    return "\n".join(lines) + "\n"
