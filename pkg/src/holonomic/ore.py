"""Ore algebras of shift and differential operators; left Groebner bases.

An ``OreAlgebra`` has commutative variables (n, k, x, ...) and operator
symbols, each bound to one of them:

    D x = x D + 1      (differential over x)
    S v = (v + 1) S    (shift over v)

All other pairs commute.  Symbols declared as ``params`` live in the
coefficient field Q(params) instead.  An ``OrePoly`` is stored in normal
form: a dict from exponent vectors over ``algebra.vars`` (commutative
variables first, then operators) to nonzero field coefficients.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product
from math import comb, factorial
from typing import Iterable, Sequence

from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .exact import (
    frac_field,
    names_of,
    sort_symbols,
    to_frac,
    to_fraction,
    to_poly,
    to_qq,
    used_symbols,
)
from .rec import AnnihilatorRec

DEFAULT_BUDGET = 100_000


class BudgetExceeded(RuntimeError):
    """A Groebner computation ran past its reduction budget or deadline."""


class RangeError(KeyError):
    """An operator needs values outside the supplied table."""


@dataclass(frozen=True)
class Operator:
    name: str
    kind: str  # "shift" or "diff"
    var: str


class OreAlgebra:
    """Commutative variables, bound operators and coefficient parameters."""

    def __init__(self, commutative: Sequence[str], operators: Sequence[Operator | tuple],
                 params: Sequence[str] = ()):
        ops = tuple(o if isinstance(o, Operator) else Operator(*o) for o in operators)
        self.commutative = tuple(commutative)
        self.operators = ops
        self.params = sort_symbols(params)
        self.vars = self.commutative + tuple(o.name for o in ops)
        if len(set(self.vars)) != len(self.vars) or set(self.vars) & set(self.params):
            raise ValueError("duplicate symbol in algebra declaration")
        bound = [o.var for o in ops]
        if len(set(bound)) != len(bound):
            raise ValueError("two operators bound to the same variable")
        for o in ops:
            if o.kind not in ("shift", "diff"):
                raise ValueError(f"unknown operator kind {o.kind!r}")
            if o.var not in self.commutative:
                raise ValueError(f"operator {o.name} bound to undeclared variable {o.var}")
        self.K = frac_field(self.params) if self.params else QQ
        self.index = {v: i for i, v in enumerate(self.vars)}
        nc = len(self.commutative)
        # (operator position, bound variable position, kind)
        self.pairs = tuple((nc + j, self.index[o.var], o.kind) for j, o in enumerate(ops))

    def __eq__(self, other):
        return isinstance(other, OreAlgebra) and (self.commutative, self.operators, self.params) == \
            (other.commutative, other.operators, other.params)

    def __hash__(self):
        return hash((self.commutative, self.operators, self.params))

    def __repr__(self):
        ops = ", ".join(f"{o.name}={o.kind}({o.var})" for o in self.operators)
        return f"OreAlgebra(vars={list(self.commutative)}, ops=[{ops}], params={list(self.params)})"

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def operator_for(self, var: str) -> Operator | None:
        return next((o for o in self.operators if o.var == var), None)

    def coeff(self, c):
        """Convert a scalar or parameter expression into the coefficient field."""
        if isinstance(c, (PolyElement, FracElement)):
            if self.K is QQ:
                return to_qq(to_fraction(c))
            return to_frac(c, self.params)
        return self.K(to_qq(c)) if self.K is not QQ else to_qq(c)

    def zero(self) -> "OrePoly":
        return OrePoly(self, {})

    def one(self) -> "OrePoly":
        return OrePoly(self, {(0,) * self.nvars: self.K.one})

    def gen(self, name: str) -> "OrePoly":
        if name in self.params:
            return OrePoly(self, {(0,) * self.nvars: self.K.gens[self.params.index(name)]})
        e = [0] * self.nvars
        e[self.index[name]] = 1
        return OrePoly(self, {tuple(e): self.K.one})

    def const(self, c) -> "OrePoly":
        c = self.coeff(c)
        return OrePoly(self, {(0,) * self.nvars: c} if c else {})

    def from_poly(self, p) -> "OrePoly":
        """Lift a commutative polynomial/rational-in-params expression."""
        if not isinstance(p, (PolyElement, FracElement)):
            return self.const(p)
        names = names_of(p)
        if isinstance(p, FracElement):
            den = p.denom
            if used_symbols(den) - set(self.params):
                raise ValueError(f"denominator {den.as_expr()} involves algebra variables")
            return self.from_poly(p.numer) * self.const(to_frac(den, self.params) ** -1 if self.params
                                                        else 1 / to_fraction(den))
        extra = used_symbols(p) - set(self.commutative) - set(self.params)
        if extra:
            raise ValueError(f"unknown symbols {sorted(extra)}")
        out: dict = {}
        F = frac_field(self.params) if self.params else None
        for monom, c in p.items():
            e = [0] * self.nvars
            pm = {}
            for name, d in zip(names, monom):
                if not d:
                    continue
                if name in self.index:
                    e[self.index[name]] = d
                else:
                    pm[name] = d
            coeff = to_qq(to_fraction(c))
            if pm:
                coeff = F(coeff)
                for name, d in pm.items():
                    coeff *= F.gens[self.params.index(name)] ** d
            elif F is not None:
                coeff = F(coeff)
            key = tuple(e)
            out[key] = out.get(key, self.K.zero) + coeff
        return OrePoly(self, {m: c for m, c in out.items() if c})

    # -------------------------------------------------------------- products
    @lru_cache(maxsize=65536)
    def _pair_expand(self, kind: str, b: int, a: int) -> tuple:
        """Normal form of op^b var^a as ((var exp, op exp, coeff), ...)."""
        if kind == "shift":
            # S^b v^a = (v+b)^a S^b
            return tuple((i, b, comb(a, i) * b ** (a - i)) for i in range(a + 1))
        # D^b x^a = sum_i C(b,i) a!/(a-i)! x^(a-i) D^(b-i)
        return tuple((a - i, b - i, comb(b, i) * factorial(a) // factorial(a - i))
                     for i in range(min(a, b) + 1))

    def monomial_product(self, u: tuple, v: tuple) -> list[tuple[tuple, int]]:
        """x^u * x^v in normal form as [(monomial, integer coefficient)]."""
        parts = []
        base = [a + b for a, b in zip(u, v)]
        for op_pos, var_pos, kind in self.pairs:
            b, a = u[op_pos], v[var_pos]
            if not b or not a:
                continue
            parts.append((op_pos, var_pos, self._pair_expand(kind, b, a)))
        if not parts:
            return [(tuple(base), 1)]
        out = []
        for choice in product(*(p[2] for p in parts)):
            e = list(base)
            c = 1
            for (op_pos, var_pos, _), (ve, oe, cc) in zip(parts, choice):
                # replace u_op + v_var contributions by the expansion term
                e[var_pos] = u[var_pos] + ve
                e[op_pos] = oe + v[op_pos]
                c *= cc
            out.append((tuple(e), c))
        return out


class OrePoly:
    """Element of an Ore algebra in normal (coefficients-left) form."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: OreAlgebra, terms: dict):
        self.algebra = algebra
        self.terms = terms

    # -------------------------------------------------------------- basics
    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, OrePoly):
            return self.algebra == other.algebra and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted((m, str(c)) for m, c in self.terms.items())))

    def __repr__(self):
        from .render import render_ore
        return f"OrePoly({render_ore(self)})"

    def _lift(self, other) -> "OrePoly":
        if isinstance(other, OrePoly):
            if other.algebra != self.algebra:
                raise ValueError("operands live in different algebras")
            return other
        return self.algebra.from_poly(other) if isinstance(other, (PolyElement, FracElement)) \
            else self.algebra.const(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return OrePoly(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return OrePoly(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "OrePoly":
        if not c:
            return self.algebra.zero()
        return OrePoly(self.algebra, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, OrePoly):
            other = self._lift(other)
        return ore_mul(self, other)

    def __rmul__(self, other):
        return ore_mul(self._lift(other), self)

    def __pow__(self, e: int):
        out = self.algebra.one()
        for _ in range(e):
            out = out * self
        return out

    def variables(self) -> set[str]:
        used = set()
        for m in self.terms:
            used |= {self.algebra.vars[i] for i, e in enumerate(m) if e}
        return used

    def degree(self, name: str) -> int:
        i = self.algebra.index[name]
        return max((m[i] for m in self.terms), default=-1)


def ore_mul(a: OrePoly, b: OrePoly) -> OrePoly:
    """Normal-form product a*b using the commutation rules."""
    alg = a.algebra
    if b.algebra != alg:
        raise ValueError("operands live in different algebras")
    out: dict = {}
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            c = cu * cv
            for w, k in alg.monomial_product(u, v):
                s = out.get(w)
                s = c * k if s is None else s + c * k
                if s:
                    out[w] = s
                else:
                    out.pop(w, None)
    return OrePoly(alg, out)


def monomial(alg: OreAlgebra, exps: tuple, c=1) -> OrePoly:
    return OrePoly(alg, {tuple(exps): alg.coeff(c)})


# --------------------------------------------------------------------------
# term orders

@dataclass(frozen=True)
class TermOrder:
    """``lex`` over ``priority`` (listed first, rest appended), or a block order.

    For ``block``, ``blocks`` is a tuple of variable groups, highest first;
    each block is compared by total degree, then lexicographically.
    """
    kind: str = "lex"
    priority: tuple = ()
    blocks: tuple = ()

    @staticmethod
    def lex(*names: str) -> "TermOrder":
        return TermOrder("lex", tuple(names))

    @staticmethod
    def block(*blocks: Sequence[str]) -> "TermOrder":
        return TermOrder("block", (), tuple(tuple(b) for b in blocks))

    def key_for(self, alg: OreAlgebra):
        """A function mapping an exponent vector to a comparable tuple."""
        if self.kind == "lex":
            names = [v for v in self.priority if v in alg.index]
            unknown = [v for v in self.priority if v not in alg.index]
            if unknown:
                raise ValueError(f"order mentions unknown variables {unknown}")
            names += [v for v in alg.vars if v not in names]
            idx = [alg.index[v] for v in names]
            return lambda m: tuple(m[i] for i in idx)
        if self.kind == "block":
            seen = [v for b in self.blocks for v in b]
            unknown = [v for v in seen if v not in alg.index]
            if unknown:
                raise ValueError(f"order mentions unknown variables {unknown}")
            blocks = [list(b) for b in self.blocks]
            rest = [v for v in alg.vars if v not in seen]
            if rest:
                blocks.append(rest)
            groups = [[alg.index[v] for v in b] for b in blocks]

            def key(m):
                out = []
                for g in groups:
                    out.append(sum(m[i] for i in g))
                    out.extend(m[i] for i in g)
                return tuple(out)

            return key
        raise ValueError(f"unknown order kind {self.kind!r}")


def leading(p: OrePoly, key) -> tuple:
    m = max(p.terms, key=key)
    return m, p.terms[m]


def _divides(u: tuple, v: tuple) -> bool:
    return all(a <= b for a, b in zip(u, v))


# --------------------------------------------------------------------------
# reduction

@dataclass
class _Budget:
    limit: int = DEFAULT_BUDGET
    deadline: float | None = None
    used: int = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(f"reduction budget of {self.limit} steps exceeded")
        if self.deadline is not None and self.used % 64 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded("deadline exceeded")


def left_reduce(p: OrePoly, basis: Sequence[OrePoly], order: TermOrder,
                cofactors: bool = False, budget: _Budget | None = None):
    """Left normal form of ``p`` modulo ``basis``.

    With ``cofactors=True`` returns (remainder, [c_i]) such that
    sum c_i * basis_i + remainder == p.
    """
    alg = p.algebra
    key = order.key_for(alg)
    budget = budget or _Budget()
    leads = [leading(g, key) for g in basis]
    cof = [alg.zero() for _ in basis] if cofactors else None
    rem: dict = {}
    work = dict(p.terms)
    while work:
        m = max(work, key=key)
        c = work[m]
        for i, (lm, lc) in enumerate(leads):
            if _divides(lm, m):
                budget.tick()
                shift = tuple(a - b for a, b in zip(m, lm))
                q = monomial(alg, shift) .scale(c / lc)
                sub = ore_mul(q, basis[i])
                for w, v in sub.terms.items():
                    s = work.get(w)
                    s = -v if s is None else s - v
                    if s:
                        work[w] = s
                    else:
                        work.pop(w, None)
                if cof is not None:
                    cof[i] = cof[i] + q
                break
        else:
            rem[m] = work.pop(m)
    r = OrePoly(alg, rem)
    return (r, cof) if cofactors else r


# --------------------------------------------------------------------------
# Groebner bases

def _lcm(u, v):
    return tuple(max(a, b) for a, b in zip(u, v))


def _commuting(p: OrePoly, q: OrePoly) -> bool:
    """True when no operator of one meets its bound variable in the other."""
    alg = p.algebra
    vp, vq = p.variables(), q.variables()
    for o in alg.operators:
        if (o.name in vp and o.var in vq) or (o.name in vq and o.var in vp):
            return False
    return True


def s_poly(f: OrePoly, g: OrePoly, key) -> OrePoly:
    alg = f.algebra
    (u, cf), (v, cg) = leading(f, key), leading(g, key)
    w = _lcm(u, v)
    a = ore_mul(monomial(alg, tuple(x - y for x, y in zip(w, u))), f).scale(1 / cf)
    b = ore_mul(monomial(alg, tuple(x - y for x, y in zip(w, v))), g).scale(1 / cg)
    return a - b


def left_groebner(gens: Sequence[OrePoly], order: TermOrder, budget: int | None = None,
                  deadline: float | None = None) -> list[OrePoly]:
    """Reduced left Groebner basis (Buchberger, normal selection strategy)."""
    gens = [g for g in gens if g]
    if not gens:
        raise ValueError("no nonzero generators")
    alg = gens[0].algebra
    key = order.key_for(alg)
    bud = _Budget(budget if budget is not None else DEFAULT_BUDGET,
                  None if deadline is None else time.monotonic() + deadline)
    G: list[OrePoly] = []
    pairs: set = set()
    for g in gens:
        g = left_reduce(g, G, order, budget=bud)
        if g:
            G.append(monic(g, key))
            j = len(G) - 1
            pairs |= {(i, j) for i in range(j)}
    while pairs:
        i, j = min(pairs, key=lambda ij: (key(_lcm(leading(G[ij[0]], key)[0], leading(G[ij[1]], key)[0])), ij))
        pairs.discard((i, j))
        u, v = leading(G[i], key)[0], leading(G[j], key)[0]
        w = _lcm(u, v)
        if _chain_skip(i, j, w, G, pairs, key):
            continue
        if all(a == 0 or b == 0 for a, b in zip(u, v)) and _commuting(G[i], G[j]):
            continue
        h = left_reduce(s_poly(G[i], G[j], key), G, order, budget=bud)
        if h:
            G.append(monic(h, key))
            k = len(G) - 1
            pairs |= {(a, k) for a in range(k)}
    return reduce_basis(G, order)


def _chain_skip(i, j, w, G, pairs, key) -> bool:
    for l in range(len(G)):
        if l in (i, j):
            continue
        if _divides(leading(G[l], key)[0], w) and (min(i, l), max(i, l)) not in pairs \
                and (min(j, l), max(j, l)) not in pairs:
            return True
    return False


def monic(p: OrePoly, key) -> OrePoly:
    return p.scale(1 / leading(p, key)[1])


def reduce_basis(G: Sequence[OrePoly], order: TermOrder) -> list[OrePoly]:
    """Minimal, interreduced, content-normalized basis sorted by leading monomial."""
    alg = G[0].algebra
    key = order.key_for(alg)
    G = [monic(g, key) for g in G if g]
    keep = []
    for i, g in enumerate(G):
        lm = leading(g, key)[0]
        dominated = False
        for j, h in enumerate(G):
            if j == i:
                continue
            lh = leading(h, key)[0]
            if _divides(lh, lm) and (lh != lm or j < i):
                dominated = True
                break
        if not dominated:
            keep.append(g)
    out = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1:]
        lm, lc = leading(g, key)
        tail = OrePoly(alg, {m: c for m, c in g.terms.items() if m != lm})
        r = left_reduce(tail, others, order)
        out.append(normalize(OrePoly(alg, {lm: lc}) + r, key))
    out.sort(key=lambda g: key(leading(g, key)[0]))
    return out


def normalize(p: OrePoly, key=None) -> OrePoly:
    """Scale to primitive polynomial coefficients (over Q[params]), positive lead."""
    if not p:
        return p
    alg = p.algebra
    key = key or TermOrder.lex().key_for(alg)
    lm = leading(p, key)[0]
    if alg.K is QQ:
        vals = [to_fraction(c) for c in p.terms.values()]
        den = reduce(lambda a, b: a * b // _gcd(a, b), (v.denominator for v in vals), 1)
        ints = [int(v * den) for v in vals]
        g = reduce(_gcd, ints)
        scale = Fraction(den, g)
        if p.terms[lm] * to_qq(scale) < 0:
            scale = -scale
        return p.scale(to_qq(scale))
    from .exact import normalize_vector
    mons = list(p.terms)
    ordered = [lm] + [m for m in mons if m != lm]
    vec = normalize_vector([p.terms[m] for m in ordered])
    F = alg.K
    return OrePoly(alg, {m: F(to_poly(v, alg.params)) for m, v in zip(ordered, vec) if v})


def _gcd(a: int, b: int) -> int:
    from math import gcd
    return gcd(a, b)


def eliminate(gens: Sequence[OrePoly], drop: Iterable[str], order: TermOrder | None = None,
              budget: int | None = None) -> list[OrePoly]:
    """Groebner basis elements free of the ``drop`` variables.

    The default order is lexicographic with the dropped variables highest;
    an explicit ``order`` must rank them above all others.
    """
    drop = list(drop)
    if not drop:
        raise ValueError("nothing to eliminate")
    gens = [g for g in gens if g]
    if order is None:
        order = TermOrder.lex(*drop)
    G = left_groebner(gens, order, budget)
    return [g for g in G if not (g.variables() & set(drop))]


# --------------------------------------------------------------------------
# sums via elimination

def rec_to_ore(alg: OreAlgebra, R: AnnihilatorRec) -> OrePoly:
    op = alg.operator_for(R.var)
    if op is None or op.kind != "shift":
        raise ValueError(f"no shift operator for {R.var}")
    S = alg.gen(op.name)
    out = alg.zero()
    for j, c in enumerate(R.coeffs):
        if c:
            out = out + alg.from_poly(c) * S ** j
    return out


def specialize(p: OrePoly, name: str, value=1) -> OrePoly:
    """Substitute a number for a variable that commutes with everything left."""
    alg = p.algebra
    i = alg.index[name]
    out = alg.zero()
    for m, c in p.terms.items():
        e = list(m)
        d, e[i] = e[i], 0
        out = out + OrePoly(alg, {tuple(e): c * alg.coeff(Fraction(value) ** d)})
    return out


def ore_to_rec(p: OrePoly, var: str) -> AnnihilatorRec:
    """Read an operator in var and its shift (params allowed) as a recurrence."""
    alg = p.algebra
    op = alg.operator_for(var)
    names = sort_symbols(set(alg.commutative) | set(alg.params))
    F = frac_field(names)
    R = F.ring
    coeffs: dict[int, object] = {}
    for m, c in p.terms.items():
        j = m[alg.index[op.name]]
        mono = R.one
        for v, e in zip(alg.vars, m):
            if e and v != op.name:
                if v not in alg.commutative:
                    raise ValueError(f"operator {v} left in the recurrence")
                mono *= R.gens[names.index(v)] ** e
        coeffs[j] = coeffs.get(j, F.zero) + F(mono) * to_frac(c, names) if alg.params \
            else coeffs.get(j, F.zero) + F(mono) * F(c)
    order = max(coeffs)
    return AnnihilatorRec(var, [coeffs.get(j, F.zero) for j in range(order + 1)])


@dataclass(frozen=True)
class SumRecurrence:
    recurrence: AnnihilatorRec
    operator: OrePoly
    basis: tuple = field(default_factory=tuple)


def sum_recurrence_via_elimination(recs: Sequence[AnnihilatorRec], n: str = "n", k: str = "k",
                                   params: Sequence[str] = (), budget: int | None = None) -> SumRecurrence:
    """Recurrence for s(n) = sum_k F(n,k) from annihilators of the summand.

    Eliminates k from the left ideal they generate and substitutes K := 1 in
    a k-free element (valid when F has natural boundaries in k).
    """
    syms = set()
    for R in recs:
        syms |= set(R.names)
    params = sort_symbols((syms | set(params)) - {n, k})
    N, K = n.upper(), k.upper()
    alg = OreAlgebra((n, k), [Operator(N, "shift", n), Operator(K, "shift", k)], params)
    return sum_recurrence_from_operators([rec_to_ore(alg, R) for R in recs], n, k, budget)


def sum_recurrence_from_operators(gens: Sequence[OrePoly], n: str = "n", k: str = "k",
                                  budget: int | None = None) -> SumRecurrence:
    """Same as ``sum_recurrence_via_elimination`` for operators in an algebra
    with shift operators bound to ``n`` and ``k``."""
    alg = gens[0].algebra
    ops = {v: alg.operator_for(v) for v in (n, k)}
    for v, o in ops.items():
        if o is None or o.kind != "shift":
            raise ValueError(f"the algebra needs a shift operator for {v}")
    N, K = ops[n].name, ops[k].name
    rest = [v for v in alg.vars if v not in (k, n, K, N)]
    order = TermOrder.lex(k, n, K, N, *rest)
    free = eliminate(gens, [k], order, budget)
    cands = []
    for g in free:
        s = specialize(g, K, 1)
        if s and not (s.variables() - {n, N}):
            cands.append((s.degree(N), sum(sum(m) for m in s.terms), g, s))
    if not cands:
        raise ValueError(f"no {k}-free element found")
    cands.sort(key=lambda c: (c[0], c[1]))
    _, _, g, s = cands[0]
    return SumRecurrence(ore_to_rec(s, n), g, tuple(free))


# --------------------------------------------------------------------------
# applying operators to tables

def apply(op: OrePoly, table: dict, table_vars: Sequence[str], points: Iterable | None = None,
          values: dict | None = None) -> dict:
    """Apply ``op`` to a table {point tuple: value} over ``table_vars``.

    Shift operators move along table axes; differential operators act on
    values that are exact polynomials or rational functions in their
    variable.  Commutative table variables take the point's coordinates;
    other symbols stay symbolic unless bound in ``values``.
    """
    alg = op.algebra
    table_vars = tuple(table_vars)
    axis = {v: i for i, v in enumerate(table_vars)}
    values = dict(values or {})
    syms = set(alg.params) | {v for v in alg.commutative if v not in axis}
    syms -= set(values)
    for val in table.values():
        syms |= set(names_of(val)) - set(values)
    names = sort_symbols(syms)
    F = frac_field(names) if names else None

    def lift(x):
        if F is None:
            return Fraction(x) if not isinstance(x, (PolyElement, FracElement)) else to_fraction(x)
        if isinstance(x, (PolyElement, FracElement)):
            from .exact import substitute
            x = substitute(x, {v: values[v] for v in values if v in names_of(x)})
            return to_frac(x, names)
        return F(to_qq(x))

    def needed(m, p):
        q = list(p)
        for o in alg.operators:
            e = m[alg.index[o.name]]
            if e and o.kind == "shift":
                if o.var not in axis:
                    raise RangeError(f"table has no axis for {o.var}")
                q[axis[o.var]] += e
        return tuple(q)

    def eval_term(m, c, p):
        q = needed(m, p)
        if q not in table:
            raise RangeError(f"point {q} outside the table")
        val = lift(table[q])
        for o in alg.operators:
            e = m[alg.index[o.name]]
            if e and o.kind == "diff":
                from .exact import diff
                for _ in range(e):
                    val = diff(val, o.var)
        coef = lift(_coeff_value(c, values, alg))
        for v, e in zip(alg.commutative, m):
            if e:
                if v in axis:
                    coef = coef * Fraction(p[axis[v]]) ** e if F is None else coef * F(to_qq(p[axis[v]])) ** e
                elif v in values:
                    coef = coef * lift(values[v]) ** e
                else:
                    coef = coef * F.gens[names.index(v)] ** e
        return coef * val

    if points is None:
        pts = [p for p in table if all(needed(m, p) in table for m in op.terms)]
        if not pts:
            raise RangeError("no table point has all required shifts")
    else:
        pts = [tuple(p) for p in points]
    out = {}
    for p in pts:
        acc = lift(0)
        for m, c in op.terms.items():
            acc = acc + eval_term(m, c, p)
        out[p] = to_fraction(acc) if F is not None and not used_symbols(acc) else acc
    return out


def _coeff_value(c, values, alg):
    if alg.K is QQ:
        return to_fraction(c)
    if values:
        from .exact import substitute
        c = substitute(c, {v: values[v] for v in values if v in alg.params})
    return c
