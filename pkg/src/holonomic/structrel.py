"""Structure relations from a recurrence and a derivative rule.

Every shifted derivative F^(j)(n+s, x) is rewritten in the window basis
F(n), ..., F(n+r-1) (r = order of the recurrence in n) with coefficients in
Q(n, x, params).  An ansatz sum_t c_t m_t(x) F^(j_t)(n+s_t) = 0 with
x-free unknowns c_t then becomes a linear system after equating the
coefficients of each power of x.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Sequence

from .exact import (
    coeffs_in,
    diff,
    evaluate,
    frac_field,
    names_of,
    nullspace,
    shift,
    sort_symbols,
    substitute,
    to_frac,
    used_symbols,
)
from .hypersum import NoSolution
from .ode import AnnihilatorODE
from .rec import AnnihilatorRec, unroll


@dataclass(frozen=True)
class DerivativeRule:
    """F'(n, x) = sum_i coeffs[i] * F(n + offset + i, x)."""
    coeffs: tuple
    offset: int = 0

    def __post_init__(self):
        if not any(self.coeffs):
            raise ValueError("derivative rule needs a nonzero coefficient")

    @property
    def width(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class HolonomicSystem:
    rec: AnnihilatorRec
    var: str = "x"
    ode: AnnihilatorODE | None = None
    rule: DerivativeRule | None = None
    initials: dict = field(default_factory=dict)  # {(n, derivative order): value}

    def __post_init__(self):
        if self.rec.order < 1:
            raise ValueError("recurrence order must be at least 1")

    @property
    def n(self) -> str:
        return self.rec.var

    def names(self) -> tuple[str, ...]:
        used = set(self.rec.names) | {self.var}
        if self.rule:
            for c in self.rule.coeffs:
                used |= set(names_of(c))
        return sort_symbols(used)


@dataclass(frozen=True)
class ShapeTerm:
    """One allowed term m(x) * F^(j)(n+s); ``fixed`` pins its coefficient to 1."""
    derivative: int
    shift: int
    multiplier: object = 1
    fixed: bool = False


@dataclass(frozen=True)
class StructureRelation:
    """sum_t coeffs[t] * terms[t].multiplier * F^(j_t)(n+s_t) = 0."""
    terms: tuple
    coeffs: tuple
    n: str = "n"
    var: str = "x"

    def rhs(self) -> dict:
        """Solved form: fixed term = sum of c * term over the others, keyed by (j, s)."""
        fixed = next((i for i, t in enumerate(self.terms) if t.fixed), 0)
        lead = self.coeffs[fixed]
        return {(t.derivative, t.shift): -c / lead
                for i, (t, c) in enumerate(zip(self.terms, self.coeffs)) if i != fixed and c}

    def coefficient(self, derivative: int, shift_: int):
        for t, c in zip(self.terms, self.coeffs):
            if (t.derivative, t.shift) == (derivative, shift_):
                return c
        raise KeyError((derivative, shift_))


class Rewriter:
    """Coordinates of shifted derivatives in the window basis."""

    def __init__(self, sys: HolonomicSystem, extra_names: Sequence[str] = ()):
        if sys.rule is None:
            raise ValueError("a derivative rule is required")
        self.sys = sys
        self.n, self.x = sys.n, sys.var
        self.names = sort_symbols(set(sys.names()) | set(extra_names))
        self.F = frac_field(self.names)
        self.r = sys.rec.order
        q = [to_frac(c, self.names) for c in sys.rec.coeffs]
        self.fwd = [-c / q[-1] for c in q[:-1]]       # F(n+r) in F(n..n+r-1)
        self.bwd = [-c / q[0] for c in q[1:]]         # F(n) in F(n+1..n+r)
        if not q[0]:
            raise ValueError("recurrence with q_0 = 0 cannot be run backwards")
        self._cache: dict = {}

    def express(self, combo: dict) -> list:
        """Reduce {offset: coefficient} of F(n+offset) into the window."""
        combo = {s: c for s, c in combo.items() if c}
        while combo:
            hi, lo = max(combo), min(combo)
            if hi >= self.r:
                c = combo.pop(hi)
                d = hi - self.r
                for i, f in enumerate(self.fwd):
                    combo[d + i] = combo.get(d + i, self.F.zero) + c * shift(f, self.n, d)
            elif lo < 0:
                c = combo.pop(lo)
                for i, f in enumerate(self.bwd):
                    combo[lo + 1 + i] = combo.get(lo + 1 + i, self.F.zero) + c * shift(f, self.n, lo)
            else:
                break
            combo = {s: c for s, c in combo.items() if c}
        vec = [self.F.zero] * self.r
        for s, c in combo.items():
            vec[s] = c
        return vec

    def derivative(self, vec: list) -> list:
        rule = self.sys.rule
        out = [diff(c, self.x) for c in vec]
        for i, c in enumerate(vec):
            if not c:
                continue
            combo = {}
            for l, rl in enumerate(rule.coeffs):
                if rl:
                    combo[i + rule.offset + l] = c * shift(to_frac(rl, self.names), self.n, i)
            for s, v in enumerate(self.express(combo)):
                out[s] += v
        return out

    def coords(self, derivative: int, shift_: int) -> list:
        key = (derivative, shift_)
        if key not in self._cache:
            if derivative == 0:
                self._cache[key] = self.express({shift_: self.F.one})
            else:
                self._cache[key] = self.derivative(self.coords(derivative - 1, shift_))
        return self._cache[key]


def _equations(columns: list[list], x: str) -> list[list]:
    """Rows over Q(n, params): coefficients of x^e of each window component."""
    rows = []
    ncols = len(columns)
    for comp in range(len(columns[0])):
        entries = [col[comp] for col in columns]
        if not any(entries):
            continue
        den = reduce(lambda a, b: a.lcm(b), (e.denom for e in entries if e))
        polys = [(e.numer * den).exquo(e.denom) if e else den.ring.zero for e in entries]
        # content in x (x-free factors) divides out automatically in the nullspace
        split = [coeffs_in(p, x) if x in names_of(p) else {0: p} for p in polys]
        powers = sorted({e for s in split for e in s})
        for e in powers:
            rows.append([s.get(e, den.ring.zero) for s in split])
    return [r for r in rows if any(r)] or [[0] * ncols]


def find_structure_relation(sys: HolonomicSystem, shape: Sequence[ShapeTerm]) -> StructureRelation | NoSolution:
    """x-free coefficients c_t with sum_t c_t m_t(x) F^(j_t)(n+s_t) = 0, minimal support."""
    shape = list(shape)
    if not shape:
        raise ValueError("empty shape")
    mult_names = set()
    for t in shape:
        mult_names |= set(names_of(t.multiplier))
    rw = Rewriter(sys, tuple(mult_names))
    cols = []
    for t in shape:
        m = to_frac(t.multiplier, rw.names)
        cols.append([m * c for c in rw.coords(t.derivative, t.shift)])
    fixed = [i for i, t in enumerate(shape) if t.fixed]
    if len(fixed) > 1:
        raise ValueError("at most one term can be fixed")
    others = [i for i in range(len(shape)) if i not in fixed]
    for size in range(0, len(others) + 1):
        for subset in combinations(others, size):
            support = sorted(fixed + list(subset))
            if not support:
                continue
            rows = _equations([cols[i] for i in support], rw.x)
            basis = [v for v in nullspace(rows, ncols=len(support)) if all(v)]
            if not basis:
                continue
            v = basis[0]
            names = sort_symbols(set(rw.names) - {rw.x})
            G = frac_field(names)
            pivot = support.index(fixed[0]) if fixed else 0
            vals = [to_frac(c, names) / to_frac(v[pivot], names) for c in v]
            coeffs = [G.zero] * len(shape)
            for i, c in zip(support, vals):
                coeffs[i] = c
            if any(rw.x in used_symbols(c) for c in coeffs):
                raise AssertionError("coefficient depends on x")
            return StructureRelation(tuple(shape), tuple(coeffs), sys.n, sys.var)
    return NoSolution("no relation of the requested shape")


# --------------------------------------------------------------------------
# exact verification

@dataclass(frozen=True)
class VerificationReport:
    max_residue: Fraction
    checked: int
    skipped: tuple = ()

    @property
    def ok(self) -> bool:
        return self.max_residue == 0 and self.checked > 0


def instances(sys: HolonomicSystem, count: int, values: dict | None = None) -> list:
    """Exact F(0..count-1, x) from the recurrence and initial polynomials."""
    r = sys.rec.order
    values = dict(values or {})
    names = sort_symbols({sys.var} | (set(sys.rec.names) - {sys.n} - set(values)))
    init = []
    for i in range(r):
        if (i, 0) not in sys.initials:
            raise ValueError(f"insufficient initial data: F({i}) missing")
        init.append(to_frac(substitute(sys.initials[(i, 0)], values), names))
    return unroll(sys.rec, init, count, values)


def verify_relation_numeric(rel: StructureRelation, sys: HolonomicSystem, n_max: int,
                            xs: Sequence = (Fraction(1, 3), Fraction(-2, 5), Fraction(3, 7), Fraction(2), Fraction(-5, 4)),
                            values: dict | None = None) -> VerificationReport:
    """Evaluate the relation exactly at n <= n_max and each x in ``xs``."""
    values = dict(values or {})
    if not rel.terms:
        return VerificationReport(Fraction(0), 1)
    smin = min(t.shift for t in rel.terms)
    smax = max(t.shift for t in rel.terms)
    polys = instances(sys, n_max + smax + 1, values)
    worst = Fraction(0)
    checked = 0
    skipped = []
    for nv in range(max(0, -smin), n_max + 1):
        try:
            cs = [evaluate(c, {rel.n: nv, **values}) for c in rel.coeffs]
        except ZeroDivisionError:
            skipped.append(nv)
            continue
        for xv in xs:
            total = Fraction(0)
            for t, c in zip(rel.terms, cs):
                if not c:
                    continue
                f = polys[nv + t.shift]
                for _ in range(t.derivative):
                    f = diff(f, rel.var)
                m = t.multiplier
                mv = evaluate(m, {rel.var: xv, **values}) if hasattr(m, "ring") or hasattr(m, "field") else Fraction(m)
                total += c * mv * evaluate(f, {rel.var: xv, **values})
            worst = max(worst, abs(total))
            checked += 1
    return VerificationReport(worst, checked, tuple(skipped))
