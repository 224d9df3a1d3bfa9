"""Exact arithmetic substrate: rings, gcds, fraction-free linear algebra.

Polynomials are sympy sparse ``PolyElement`` objects over ``QQ`` with a
graded-lex order; rational functions are ``FracElement`` objects of the
matching fraction field.  Rings are interned per sorted symbol tuple so
that elements built independently from the same symbols interoperate.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence, Union

from sympy import divisors
from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

MPoly = PolyElement
RatFunc = FracElement
Rat = Fraction
Scalar = Union[int, Fraction]

# Symbols listed here sort first, in this order; everything else is alphabetical.
SYMBOL_PRIORITY = ("n", "k", "j", "x")


def symbol_key(name: str):
    if name in SYMBOL_PRIORITY:
        return (0, SYMBOL_PRIORITY.index(name), name)
    return (1, 0, name)


def sort_symbols(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=symbol_key))


@lru_cache(maxsize=None)
def _ring(names: tuple[str, ...]) -> PolyRing:
    return PolyRing(names, QQ, grlex)


@lru_cache(maxsize=None)
def _field(names: tuple[str, ...]) -> FracField:
    return FracField(names, QQ, grlex)


def poly_ring(names: Iterable[str]) -> PolyRing:
    """The interned polynomial ring over QQ in ``names`` (canonically sorted)."""
    return _ring(sort_symbols(names))


def frac_field(names: Iterable[str]) -> FracField:
    return _field(sort_symbols(names))


def names_of(obj) -> tuple[str, ...]:
    if isinstance(obj, PolyElement):
        return tuple(str(s) for s in obj.ring.symbols)
    if isinstance(obj, FracElement):
        return tuple(str(s) for s in obj.field.symbols)
    return ()


def used_symbols(p) -> set[str]:
    """Symbols that actually occur in a polynomial or rational function."""
    if isinstance(p, FracElement):
        return used_symbols(p.numer) | used_symbols(p.denom)
    if isinstance(p, PolyElement):
        syms = p.ring.symbols
        out = set()
        for monom in p.keys():
            for i, e in enumerate(monom):
                if e:
                    out.add(str(syms[i]))
        return out
    return set()


def to_qq(c):
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    if isinstance(c, int):
        return QQ(c)
    return QQ.convert(c)


def to_fraction(c) -> Fraction:
    """Convert a ground element (mpq, int, constant poly/frac) to ``Fraction``."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, FracElement):
        num, den = to_fraction(c.numer), to_fraction(c.denom)
        return num / den
    if isinstance(c, PolyElement):
        if not c:
            return Fraction(0)
        if not c.is_ground:
            raise ValueError(f"not a constant: {c}")
        c = c.LC
    return Fraction(int(c.numerator), int(c.denominator))


def to_poly(obj, names: Iterable[str]) -> PolyElement:
    """Lift ``obj`` (scalar or polynomial) into the ring over ``names``."""
    R = poly_ring(names)
    if isinstance(obj, PolyElement):
        if obj.ring == R:
            return obj
        return obj.set_ring(R)
    if isinstance(obj, FracElement):
        if not obj.denom.is_ground:
            raise ValueError(f"not a polynomial: {obj}")
        return to_poly(obj.numer, names) * R(obj.denom.LC ** -1)
    return R(to_qq(obj))


def to_frac(obj, names: Iterable[str]) -> FracElement:
    F = frac_field(names)
    if isinstance(obj, FracElement):
        if obj.field == F:
            return obj
        return F.new(to_poly(obj.numer, names), to_poly(obj.denom, names))
    if isinstance(obj, PolyElement):
        return F.new(to_poly(obj, names), F.ring.one)
    return F(to_qq(obj))


def union_names(*objs) -> tuple[str, ...]:
    names: set[str] = set()
    for o in objs:
        names.update(names_of(o))
    return sort_symbols(names)


def gen(R: PolyRing, name: str) -> PolyElement:
    return R.gens[[str(s) for s in R.symbols].index(name)]


def var_index(R: PolyRing, name: str) -> int:
    return [str(s) for s in R.symbols].index(name)


# --------------------------------------------------------------------------
# polynomial helpers

def poly_gcd(a: PolyElement, b: PolyElement) -> PolyElement:
    """Greatest common divisor, monic in the ring's order; gcd(0, 0) = 0."""
    names = union_names(a, b)
    a, b = to_poly(a, names), to_poly(b, names)
    if not a and not b:
        return a
    return a.gcd(b)


def primitive(p: PolyElement) -> PolyElement:
    """Integer coefficients with content 1 and positive leading coefficient."""
    if not p:
        return p
    _, q = p.clear_denoms()
    _, q = q.primitive()
    if q.LC < 0:
        q = -q
    return q


def normalize_vector(vec: Sequence) -> list[PolyElement]:
    """Scale a vector of polynomials/rational functions to primitive polynomials.

    Removes all denominators and the common polynomial gcd; the first nonzero
    entry gets a positive leading coefficient.
    """
    names = union_names(*vec)
    F = frac_field(names)
    fr = [to_frac(v, names) for v in vec]
    den = reduce(lambda u, v: u.lcm(v), (f.denom for f in fr), F.ring.one)
    polys = [(f.numer * den).exquo(f.denom) for f in fr]
    nz = [p for p in polys if p]
    if not nz:
        return polys
    g = reduce(lambda u, v: u.gcd(v), nz)
    polys = [p.exquo(g) for p in polys]
    denoms = [p.clear_denoms()[0] for p in polys if p]
    scale = reduce(lambda u, v: QQ.lcm(u, v), denoms, QQ.one)
    polys = [p * scale for p in polys]
    content = reduce(QQ.gcd, (c for p in polys for c in p.values()), QQ.zero)
    polys = [p.quo_ground(content) for p in polys]
    lead = next(p for p in polys if p)
    if lead.LC < 0:
        polys = [-p for p in polys]
    return polys


def shift(p, var: str, s: int = 1):
    """Substitute ``var -> var + s`` in a polynomial or rational function."""
    if isinstance(p, FracElement):
        F = p.field
        return F.new(shift(p.numer, var, s), shift(p.denom, var, s))
    if isinstance(p, PolyElement):
        if var not in names_of(p) or s == 0:
            return p
        x = gen(p.ring, var)
        return p.compose(x, x + s)
    return p


def substitute(p, values: dict):
    """Substitute numbers (or ring elements) for symbols; ring is preserved."""
    if isinstance(p, FracElement):
        return p.field.new(substitute(p.numer, values), substitute(p.denom, values))
    if isinstance(p, PolyElement):
        names = names_of(p)
        items = []
        for v, val in values.items():
            if v in names:
                x = gen(p.ring, v)
                if isinstance(val, (PolyElement, FracElement)):
                    items.append((x, to_poly(val, names)))
                else:
                    items.append((x, to_qq(val)))
        if not items:
            return p
        return p.compose(items)
    return p


def evaluate(p, values: dict) -> Fraction:
    """Fully evaluate to a rational number; raises if symbols remain."""
    q = substitute(p, values)
    if isinstance(q, FracElement):
        den = to_fraction(q.denom)
        if den == 0:
            raise ZeroDivisionError(f"denominator vanishes at {values}")
        return to_fraction(q.numer) / den
    return to_fraction(q)


def coeffs_in(p: PolyElement, var: str) -> dict[int, PolyElement]:
    """Split ``p`` by powers of ``var``: {exponent: coefficient poly (var-free)}."""
    R = p.ring
    i = var_index(R, var)
    out: dict[int, dict] = {}
    for monom, c in p.items():
        e = monom[i]
        m = monom[:i] + (0,) + monom[i + 1:]
        out.setdefault(e, {})[m] = c
    return {e: R.from_dict(d) for e, d in out.items()}


def degree_in(p, var: str) -> int:
    if isinstance(p, FracElement):
        return max(degree_in(p.numer, var), degree_in(p.denom, var))
    if not p:
        return -1
    if var not in names_of(p):
        return 0
    return p.degree(gen(p.ring, var))


def diff(p, var: str):
    if isinstance(p, FracElement):
        if var not in names_of(p):
            return p.field.zero
        return p.diff(p.field.gens[var_index(p.field.ring, var)])
    if var not in names_of(p):
        return p.ring.zero
    return p.diff(gen(p.ring, var))


def as_univariate_ints(p: PolyElement) -> tuple[str | None, list[int]]:
    """Return (variable, integer coefficient list low->high) of a univariate poly."""
    used = used_symbols(p)
    if len(used) > 1:
        raise ValueError(f"not univariate: {p}")
    q = primitive(p)
    if not used:
        return None, [int(q.LC)] if q else [0]
    var = used.pop()
    i = var_index(q.ring, var)
    deg = max(m[i] for m in q.keys())
    coeffs = [0] * (deg + 1)
    for m, c in q.items():
        coeffs[m[i]] = int(c)
    return var, coeffs


def integer_roots(p: PolyElement) -> set[int]:
    """All integer roots of a nonzero univariate polynomial over QQ."""
    if not p:
        raise ValueError("integer_roots of the zero polynomial")
    _, coeffs = as_univariate_ints(p)
    roots: set[int] = set()
    low = 0
    while low < len(coeffs) and coeffs[low] == 0:
        low += 1
    if low:
        roots.add(0)
    coeffs = coeffs[low:]
    if len(coeffs) <= 1:
        return roots
    for d in divisors(abs(coeffs[0])):
        for cand in (d, -d):
            acc = 0
            for c in reversed(coeffs):
                acc = acc * cand + c
            if acc == 0:
                roots.add(cand)
    return roots


def rational_roots(p: PolyElement) -> dict[Fraction, int]:
    """Rational roots of a univariate polynomial with multiplicities."""
    _, coeffs = as_univariate_ints(p)
    roots: dict[Fraction, int] = {}
    low = 0
    while low < len(coeffs) and coeffs[low] == 0:
        low += 1
    if low:
        roots[Fraction(0)] = low
    coeffs = coeffs[low:]
    if len(coeffs) <= 1:
        return roots
    cands = {Fraction(s * a, b) for a in divisors(abs(coeffs[0]))
             for b in divisors(abs(coeffs[-1])) for s in (1, -1)}
    for r in sorted(cands):
        mult = 0
        while len(coeffs) > 1:
            # synthetic division by (x - r) over QQ
            acc = Fraction(0)
            quot = []
            for c in reversed(coeffs):
                acc = acc * r + c
                quot.append(acc)
            if acc != 0:
                break
            quot.pop()
            coeffs = list(reversed(quot))
            mult += 1
        if mult:
            roots[r] = mult
    return roots


def dispersion(a: PolyElement, b: PolyElement, var: str) -> set[int]:
    """All j >= 0 such that gcd(a(var), b(var + j)) is nonconstant in ``var``.

    Other symbols are treated as transcendental: j must work identically in
    them.  Computed from the integer roots of Res_var(a(var), b(var + j)).
    """
    if not a or not b:
        raise ValueError("dispersion of a zero polynomial")
    others = [s for s in union_names(a, b) if s != var]
    jname = "_disp_j"
    R = PolyRing((var, jname, *others), QQ, grlex)
    A, B = a.set_ring(R), b.set_ring(R)
    x, j = R.gens[0], R.gens[1]
    if A.degree(x) <= 0 or B.degree(x) <= 0:
        return set()
    res = A.resultant(B.compose(x, x + j))
    if not res:
        return set()
    res = res.set_ring(R) if res.ring != R else res
    # j must be a root of every coefficient w.r.t. the parameters
    groups: dict[tuple, dict] = {}
    for monom, c in res.items():
        groups.setdefault(monom[2:], {})[(0, monom[1]) + (0,) * len(others)] = c
    polys = [R.from_dict(d) for d in groups.values()]
    g = reduce(lambda u, v: u.gcd(v), polys)
    if g.is_ground:
        return set()
    return {r for r in integer_roots(g) if r >= 0}


# --------------------------------------------------------------------------
# fraction-free linear algebra

def _rows_to_polys(rows: Sequence[Sequence]) -> tuple[list[list[PolyElement]], tuple[str, ...]]:
    names = union_names(*(e for r in rows for e in r))
    R = poly_ring(names)
    out = []
    for r in rows:
        fr = [to_frac(e, names) for e in r]
        den = reduce(lambda u, v: u.lcm(v), (f.denom for f in fr), R.one)
        out.append([(f.numer * den).exquo(f.denom) for f in fr])
    return out, names


def echelon(rows: Sequence[Sequence], column_order: Sequence[int] | None = None):
    """Fraction-free (Bareiss) row echelon form.

    Returns (reduced rows, pivot columns, names).  Every entry of the result
    is a minor of the input, so divisions by the previous pivot are exact.
    """
    if not rows:
        return [], [], ()
    mat, names = _rows_to_polys(rows)
    R = poly_ring(names)
    ncols = len(mat[0])
    cols = list(column_order) if column_order is not None else list(range(ncols))
    mat = [r for r in mat if any(r)]
    nrows = len(mat)
    prev = R.one
    pivots: list[int] = []
    r = 0
    for c in cols:
        if r >= nrows:
            break
        cand = [i for i in range(r, nrows) if mat[i][c]]
        if not cand:
            continue
        best = min(cand, key=lambda i: (len(mat[i][c]), sum(1 for e in mat[i] if e)))
        mat[r], mat[best] = mat[best], mat[r]
        p = mat[r][c]
        for i in range(r + 1, nrows):
            f = mat[i][c]
            row = mat[i]
            for cc in cols:
                if cc == c:
                    continue
                e = p * row[cc] - f * mat[r][cc] if f else p * row[cc]
                row[cc] = e.exquo(prev) if e else e
            row[c] = R.zero
        prev = p
        pivots.append(c)
        r += 1
    return mat[:len(pivots)], pivots, names


def rank(rows: Sequence[Sequence], column_order: Sequence[int] | None = None) -> int:
    return len(echelon(rows, column_order)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[PolyElement]]:
    """Basis of the right nullspace of a matrix over a rational-function field.

    Entries may be ints, Fractions, polynomials or rational functions.  Each
    returned vector is scaled to primitive polynomial entries.
    """
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        R = poly_ring(())
        return [[R.one if i == j else R.zero for i in range(ncols)] for j in range(ncols)]
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise ValueError("matrix is not rectangular")
    ech, pivots, names = echelon(rows)
    F = frac_field(names)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [F.zero] * ncols
        v[f] = F.one
        for i in reversed(range(len(pivots))):
            pc = pivots[i]
            row = ech[i]
            acc = F.zero
            for c in range(pc + 1, ncols):
                if row[c] and v[c]:
                    acc += F(row[c]) * v[c]
            v[pc] = -acc / F(row[pc])
        basis.append(normalize_vector(v))
    return basis


def mat_vec(rows: Sequence[Sequence], vec: Sequence) -> list:
    names = union_names(*(e for r in rows for e in r), *vec)
    F = frac_field(names)
    out = []
    for r in rows:
        acc = F.zero
        for e, v in zip(r, vec):
            acc += to_frac(e, names) * to_frac(v, names)
        out.append(acc)
    return out
