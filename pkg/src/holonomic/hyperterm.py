"""Hypergeometric terms in several integer variables.

A ``HyperTerm`` is a product

    rational(vars) * prod (L_i)!^(e_i) * prod base_j^(E_j)

where each L_i and E_j is a linear form with integer coefficients in the
variables (symbolic parameters may appear in factorial offsets).  Binomial
coefficients are sugar for three factorial factors.  A ``TermSum`` is a finite
sum of such terms, merged so that no two summands differ only in the
rational part.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence, Union

from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .exact import (
    coeffs_in,
    evaluate,
    frac_field,
    gen,
    names_of,
    shift,
    sort_symbols,
    substitute,
    to_frac,
    to_fraction,
    to_poly,
    to_qq,
    used_symbols,
)
from .rec import AnnihilatorRec, rec_sum

Base = Union[Fraction, str]


class UndefinedTerm(ValueError):
    """A factorial in the numerator was evaluated at a negative integer."""


def _names(rational, forms: Iterable, bases: Iterable) -> tuple[str, ...]:
    used = used_symbols(rational)
    for f in forms:
        used |= used_symbols(f)
    for b in bases:
        if isinstance(b, str):
            used.add(b)
    return sort_symbols(used)


def _check_linear(form: PolyElement, what: str):
    for monom, c in form.items():
        if sum(monom) > 1:
            raise ValueError(f"{what} must be linear: {form.as_expr()}")
        if sum(monom) == 1 and to_fraction(c).denominator != 1:
            raise ValueError(f"{what} needs integer coefficients: {form.as_expr()}")


def _form_key(form: PolyElement):
    names = names_of(form)
    return tuple(sorted((tuple(zip(names, m)), Fraction(int(c.numerator), int(c.denominator)))
                        for m, c in form.items()))


@dataclass(frozen=True, eq=False)
class HyperTerm:
    rational: FracElement
    factorials: tuple = ()
    geometric: tuple = ()

    # ------------------------------------------------------------ building
    @classmethod
    def make(cls, rational=1, factorials: Sequence = (), geometric: Sequence = ()) -> "HyperTerm":
        """Canonicalize: one ring, merged factors, no trivial factors."""
        names = _names(rational if isinstance(rational, (PolyElement, FracElement)) else 0,
                       [f for f, _ in factorials] + [e for _, e in geometric],
                       [b for b, _ in geometric])
        rat = to_frac(rational, names)
        merged: dict = {}
        for form, e in factorials:
            form = to_poly(form, names)
            _check_linear(form, "factorial argument")
            if form.is_ground:
                c = to_fraction(form)
                if c.denominator != 1:
                    raise ValueError(f"factorial of a non-integer: {c}")
                if c >= 0:
                    rat *= Fraction(factorial(int(c))) ** e
                    continue
            key = _form_key(form)
            old = merged.get(key)
            merged[key] = (form, e + (old[1] if old else 0))
        facts = tuple(v for _, v in sorted(merged.items()) if v[1])
        gmerged: dict = {}
        for base, expo in geometric:
            if not isinstance(base, str):
                base = Fraction(base)
                if base == 1:
                    continue
            expo = to_poly(expo, names)
            _check_linear(expo, "exponent")
            if not expo:
                continue
            if to_fraction(expo.coeff(1)).denominator != 1:
                raise ValueError(f"exponent needs an integer constant term: {expo.as_expr()}")
            if expo.is_ground:
                e = int(to_fraction(expo))
                rat *= rat.field.gens[names.index(base)] ** e if isinstance(base, str) else base ** e
                continue
            key = (isinstance(base, str), str(base))
            old = gmerged.get(key)
            gmerged[key] = (base, expo + (old[1] if old else 0))
        geoms = tuple(v for _, v in sorted(gmerged.items()) if v[1])
        names = _names(rat, [f for f, _ in facts] + [e for _, e in geoms], [b for b, _ in geoms])
        rat = to_frac(rat, names)
        facts = tuple((to_poly(f, names), e) for f, e in facts)
        geoms = tuple((b, to_poly(e, names)) for b, e in geoms)
        return cls(rat, facts, geoms)

    @classmethod
    def const(cls, c) -> "HyperTerm":
        return cls.make(Fraction(c))

    @classmethod
    def rat(cls, r) -> "HyperTerm":
        return cls.make(r)

    @classmethod
    def fact(cls, form, exponent: int = 1) -> "HyperTerm":
        return cls.make(1, [(form, exponent)])

    @classmethod
    def power(cls, base: Base, exponent) -> "HyperTerm":
        return cls.make(1, (), [(base, exponent)])

    @classmethod
    def binomial(cls, a, b) -> "HyperTerm":
        names = sort_symbols(set(names_of(a)) | set(names_of(b)))
        a, b = to_poly(a, names), to_poly(b, names)
        return cls.make(1, [(a, 1), (b, -1), (a - b, -1)])

    # ------------------------------------------------------------ algebra
    @property
    def names(self) -> tuple[str, ...]:
        return names_of(self.rational)

    def is_zero(self) -> bool:
        return not self.rational

    def signature(self):
        """Everything except the rational part, ring independent."""
        return (tuple((_form_key(f), e) for f, e in self.factorials),
                tuple((str(b), _form_key(e)) for b, e in self.geometric))

    def __mul__(self, other):
        if isinstance(other, TermSum):
            return TermSum.of(self) * other
        if not isinstance(other, HyperTerm):
            other = HyperTerm.const(other)
        names = sort_symbols(set(self.names) | set(other.names))
        return HyperTerm.make(to_frac(self.rational, names) * to_frac(other.rational, names),
                              self.factorials + other.factorials,
                              self.geometric + other.geometric)

    __rmul__ = __mul__

    def inverse(self) -> "HyperTerm":
        if not self.rational:
            raise ZeroDivisionError("inverse of the zero term")
        return HyperTerm.make(1 / self.rational,
                              [(f, -e) for f, e in self.factorials],
                              [(b, -e) for b, e in self.geometric])

    def __truediv__(self, other):
        if not isinstance(other, HyperTerm):
            other = HyperTerm.const(other)
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return HyperTerm.make(self.rational ** e,
                              [(f, k * e) for f, k in self.factorials],
                              [(b, x * e) for b, x in self.geometric])

    def __neg__(self):
        return HyperTerm(-self.rational, self.factorials, self.geometric)

    def __add__(self, other):
        return TermSum.of(self) + other

    __radd__ = __add__

    def __sub__(self, other):
        return TermSum.of(self) + (-other)

    def __eq__(self, other):
        if not isinstance(other, HyperTerm):
            return NotImplemented
        if self.signature() != other.signature():
            return False
        names = sort_symbols(set(self.names) | set(other.names))
        return to_frac(self.rational, names) == to_frac(other.rational, names)

    def __hash__(self):
        return hash(self.signature())

    def __repr__(self):
        from .render import render_term
        return f"HyperTerm({render_term(self)})"

    # ------------------------------------------------------------ shifts
    def shift(self, var: str, s: int = 1) -> "HyperTerm":
        if var not in self.names:
            return self
        x = gen(to_poly(0, self.names).ring, var)
        sub = {var: x + s}
        return HyperTerm.make(substitute(self.rational, sub),
                              [(substitute(f, sub), e) for f, e in self.factorials],
                              [(b, substitute(x_, sub)) for b, x_ in self.geometric])

    def substitute(self, values: dict) -> "HyperTerm":
        """Bind symbols to rationals (or polynomials) everywhere."""
        geoms = []
        rational = substitute(self.rational, values)
        for b, x in self.geometric:
            if isinstance(b, str) and b in values:
                b = Fraction(values[b])
            geoms.append((b, substitute(x, values)))
        return HyperTerm.make(rational, [(substitute(f, values), e) for f, e in self.factorials], geoms)

    def ratio(self, var: str) -> FracElement:
        """t(var + 1) / t(var) as a canonical rational function."""
        names = self.names
        F = frac_field(names)
        out = F.one
        if var in names:
            out = shift(self.rational, var, 1) / self.rational
        for form, e in self.factorials:
            m = slope(form, var)
            if m == 0:
                continue
            L = F(form)
            if m > 0:
                block = F.one
                for i in range(1, m + 1):
                    block *= L + i
            else:
                block = F.one
                for i in range(-m):
                    block *= L - i
                block = 1 / block
            out *= block ** e
        for base, expo in self.geometric:
            if base == var:
                raise ValueError(f"{var}^({expo.as_expr()}) is not hypergeometric in {var}")
            m = slope(expo, var)
            if m == 0:
                continue
            b = F.gens[names.index(base)] if isinstance(base, str) else F(to_qq(base))
            out *= b ** m
        return out

    # ------------------------------------------------------------ evaluation
    def evaluate(self, values: dict) -> Fraction:
        """Exact value; reciprocal factorials of negative integers give 0."""
        vanishes = False
        value = Fraction(1)
        for form, e in self.factorials:
            arg = _int_value(form, values)
            if arg < 0:
                if e > 0:
                    raise UndefinedTerm(f"factorial of negative integer {arg}")
                vanishes = True
            elif not vanishes:
                value *= Fraction(factorial(arg)) ** e
        if vanishes:
            return Fraction(0)
        for base, expo in self.geometric:
            b = Fraction(values[base]) if isinstance(base, str) else base
            value *= b ** _int_value(expo, values)
        return value * evaluate(self.rational, values)

    def reciprocal_bounds(self, var: str, values: dict) -> tuple[int | None, int | None]:
        """Range of ``var`` outside which a reciprocal factorial vanishes.

        ``values`` binds every other symbol.  Returns (low, high), either of
        which may be None when no factor bounds that side.
        """
        low = high = None
        for form, e in self.factorials:
            if e >= 0:
                continue
            m = slope(form, var)
            if m == 0:
                continue
            rest = _int_value(form, {**values, var: 0})
            # m*var + rest >= 0 is required for a nonzero value
            if m > 0:
                b = -(rest // m)
                low = b if low is None else max(low, b)
            else:
                b = rest // (-m)
                high = b if high is None else min(high, b)
        return low, high

    def has_natural_boundaries(self, var: str) -> bool:
        signs = {1 if slope(f, var) > 0 else -1 for f, e in self.factorials
                 if e < 0 and slope(f, var) != 0}
        return signs == {1, -1}


def slope(form: PolyElement, var: str) -> int:
    if var not in names_of(form):
        return 0
    c = coeffs_in(form, var).get(1)
    if c is None:
        return 0
    v = to_fraction(c)
    if v.denominator != 1:
        raise ValueError(f"non-integer slope in {form.as_expr()}")
    return int(v)


def _int_value(form: PolyElement, values: dict) -> int:
    v = evaluate(form, values)
    if v.denominator != 1:
        raise ValueError(f"non-integer value {v} of {form.as_expr()}")
    return int(v)


# --------------------------------------------------------------------------
# sums of terms

@dataclass(frozen=True)
class TermSum:
    terms: tuple = ()

    @classmethod
    def of(cls, *terms) -> "TermSum":
        out: dict = {}
        order = []
        for t in terms:
            if isinstance(t, TermSum):
                parts = t.terms
            elif isinstance(t, HyperTerm):
                parts = (t,)
            else:
                parts = (HyperTerm.const(t),)
            for p in parts:
                key = p.signature()
                if key in out:
                    out[key] = _add_like(out[key], p)
                else:
                    out[key] = p
                    order.append(key)
        return cls(tuple(out[k] for k in order if not out[k].is_zero()))

    def __add__(self, other):
        return TermSum.of(self, other)

    __radd__ = __add__

    def __neg__(self):
        return TermSum(tuple(-t for t in self.terms))

    def __sub__(self, other):
        return self + (-_as_sum(other))

    def __mul__(self, other):
        other = _as_sum(other)
        return TermSum.of(*(a * b for a in self.terms for b in other.terms))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return TermSum.of(self.single().inverse() ** (-e))
        out = TermSum.of(HyperTerm.const(1))
        for _ in range(e):
            out = out * self
        return out

    def __truediv__(self, other):
        other = _as_sum(other)
        return self * other.single().inverse()

    def single(self) -> HyperTerm:
        if len(self.terms) != 1:
            raise ValueError("expected a single hypergeometric term")
        return self.terms[0]

    def evaluate(self, values: dict) -> Fraction:
        return sum((t.evaluate(values) for t in self.terms), Fraction(0))

    def __repr__(self):
        from .render import render_term
        return f"TermSum({render_term(self)})"


def _as_sum(x) -> TermSum:
    if isinstance(x, TermSum):
        return x
    return TermSum.of(x)


def _add_like(a: HyperTerm, b: HyperTerm) -> HyperTerm:
    names = sort_symbols(set(a.names) | set(b.names))
    return HyperTerm.make(to_frac(a.rational, names) + to_frac(b.rational, names),
                          a.factorials, a.geometric)


# --------------------------------------------------------------------------
# recurrences from terms

@dataclass(frozen=True)
class TermRatio:
    var: str
    ratio: FracElement


def term_ratio(t: HyperTerm, var: str) -> TermRatio:
    if t.is_zero():
        raise ValueError("the zero term has no ratio")
    return TermRatio(var, t.ratio(var))


def term_to_rec(t: HyperTerm, var: str) -> AnnihilatorRec:
    """First-order recurrence den*a(var+1) - num*a(var) = 0 from the ratio."""
    r = t.ratio(var)
    names = sort_symbols(set(names_of(r)) | {var})
    return AnnihilatorRec(var, [-to_poly(r.numer, names), to_poly(r.denom, names)])


def mixed_rec(e: HyperTerm | TermSum, var: str) -> AnnihilatorRec:
    """Recurrence in ``var`` for a sum of terms (other symbols are parameters)."""
    terms = e.terms if isinstance(e, TermSum) else (e,)
    if not terms:
        raise ValueError("zero expression")
    out = term_to_rec(terms[0], var)
    for t in terms[1:]:
        out = rec_sum(out, term_to_rec(t, var))
    return out
