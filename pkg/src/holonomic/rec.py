"""Holonomic recurrences: annihilators of P-recursive sequences.

An ``AnnihilatorRec`` with coefficients q_0..q_r encodes

    q_r(n) a(n+r) + ... + q_1(n) a(n+1) + q_0(n) a(n) = 0,

with polynomial coefficients in ``var`` (other symbols act as parameters).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .exact import (
    PolyElement,
    evaluate,
    frac_field,
    poly_ring,
    shift,
    sort_symbols,
    substitute,
    to_frac,
    to_fraction,
    to_poly,
    union_names,
    used_symbols,
)
from .operators import minimal_ansatz, normalize_coeffs, shrink


def shift_symbol(var: str) -> str:
    """Operator name for the shift in ``var``: N for n, S for longer names."""
    return var.upper() if len(var) == 1 and var.islower() else "S"

class InsufficientInitialValues(ValueError):
    """The recurrence does not determine a value; ``index`` names it."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"singular leading coefficient at index {index}, value not determined")


class AnnihilatorRec:
    """Homogeneous linear recurrence with polynomial coefficients."""

    __slots__ = ("var", "coeffs")

    def __init__(self, var: str, coeffs: Sequence, normalize: bool = True):
        if normalize:
            coeffs, _ = normalize_coeffs(var, coeffs, discrete=True)
            coeffs, _ = shrink(coeffs, keep=(var,))
        else:
            names = sort_symbols(set(union_names(*coeffs)) | {var})
            coeffs = tuple(to_poly(c, names) for c in coeffs)
        self.var = var
        self.coeffs: tuple[PolyElement, ...] = tuple(coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> PolyElement:
        return self.coeffs[-1]

    @property
    def ring(self):
        return self.coeffs[0].ring

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(str(s) for s in self.ring.symbols)

    def parameters(self) -> set[str]:
        used = set()
        for c in self.coeffs:
            used |= used_symbols(c)
        return used - {self.var}

    def __eq__(self, other):
        if not isinstance(other, AnnihilatorRec):
            return NotImplemented
        if self.var != other.var or self.order != other.order:
            return False
        names = union_names(self.coeffs[0], other.coeffs[0])
        return all(to_poly(a, names) == to_poly(b, names) for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.var, tuple(str(c) for c in self.coeffs)))

    def __repr__(self):
        from .render import render_rec
        return f"AnnihilatorRec({render_rec(self)})"

    def residual(self, seq, n: int, values: dict | None = None):
        """Apply the operator to a sequence (indexable or callable) at ``n``."""
        get = seq if callable(seq) else seq.__getitem__
        point = {self.var: n, **(values or {})}
        total = 0
        for i, c in enumerate(self.coeffs):
            if c:
                total += _eval_coeff(c, point) * get(n + i)
        return total

    def substitute(self, values: dict) -> "AnnihilatorRec":
        return AnnihilatorRec(self.var, [substitute(c, values) for c in self.coeffs])


def _eval_coeff(c, point):
    q = substitute(c, point)
    if used_symbols(q):
        return q
    return to_fraction(q)


def rec(var: str, coeffs: Iterable) -> AnnihilatorRec:
    return AnnihilatorRec(var, list(coeffs))


# --------------------------------------------------------------------------
# closure properties

def _reducer(R: AnnihilatorRec, F):
    """Return next(v): coordinates of a(n+m+1) from those of a(n+m)."""
    r = R.order
    if r < 1:
        raise ValueError("closure requires order >= 1")
    names = tuple(str(s) for s in F.symbols)
    lead = to_frac(R.leading, names)
    red = [-to_frac(q, names) / lead for q in R.coeffs[:-1]]

    def step(v):
        w = [F.zero] * r
        for i, c in enumerate(v):
            if not c:
                continue
            c = shift(c, R.var, 1)
            if i + 1 < r:
                w[i + 1] += c
            else:
                for l in range(r):
                    w[l] += c * red[l]
        return w

    return step


def _common(A: AnnihilatorRec, B: AnnihilatorRec):
    if A.var != B.var:
        raise ValueError(f"variables differ: {A.var} vs {B.var}")
    names = sort_symbols(set(A.names) | set(B.names))
    return names, frac_field(names)


def rec_sum(A: AnnihilatorRec, B: AnnihilatorRec) -> AnnihilatorRec:
    """Minimal-order recurrence annihilating a + b for a in ker A, b in ker B."""
    names, F = _common(A, B)
    stepA, stepB = _reducer(A, F), _reducer(B, F)
    va = [F.one] + [F.zero] * (A.order - 1)
    vb = [F.one] + [F.zero] * (B.order - 1)
    cache = [va + vb]

    def vectors(s):
        nonlocal va, vb
        while len(cache) <= s:
            va, vb = stepA(va), stepB(vb)
            cache.append(va + vb)
        return cache[s]

    sol = minimal_ansatz(vectors, A.order + B.order, names)
    return AnnihilatorRec(A.var, sol)


def rec_product(A: AnnihilatorRec, B: AnnihilatorRec) -> AnnihilatorRec:
    """Minimal-order recurrence annihilating a*b for a in ker A, b in ker B."""
    names, F = _common(A, B)
    ra, rb = A.order, B.order
    stepA, stepB = _reducer(A, F), _reducer(B, F)
    # images of the basis shifts a(n+i+1), b(n+j+1) after reduction
    unit = lambda r, i: [F.one if l == i else F.zero for l in range(r)]
    upA = [stepA(unit(ra, i)) for i in range(ra)]
    upB = [stepB(unit(rb, j)) for j in range(rb)]
    # upA already carries the shift of coefficients (identity here), fine for units

    def step(M):
        out = [[F.zero] * rb for _ in range(ra)]
        for i in range(ra):
            for j in range(rb):
                c = M[i][j]
                if not c:
                    continue
                c = shift(c, A.var, 1)
                for p, u in enumerate(upA[i]):
                    if not u:
                        continue
                    for q, w in enumerate(upB[j]):
                        if w:
                            out[p][q] += c * u * w
        return out

    M = [[F.one if (i, j) == (0, 0) else F.zero for j in range(rb)] for i in range(ra)]
    cache = [M]

    def vectors(s):
        while len(cache) <= s:
            cache.append(step(cache[-1]))
        return [e for row in cache[s] for e in row]

    sol = minimal_ansatz(vectors, ra * rb, names)
    return AnnihilatorRec(A.var, sol)


# --------------------------------------------------------------------------
# unrolling

def unroll(R: AnnihilatorRec, initials: Sequence, count: int, values: dict | None = None) -> list:
    """Exact values a(0..count-1) from the recurrence and initial values.

    Values given in ``initials`` are used as is (and checked against the
    recurrence where it determines them).  Raises ``InsufficientInitialValues``
    when the leading coefficient vanishes at an index not covered.
    """
    values = dict(values or {})
    r = R.order
    params = R.parameters() - set(values)
    if params:
        F = frac_field(params)
        names = tuple(str(s) for s in F.symbols)
        conv = lambda v: to_frac(v, names)
        coeff = lambda c, n: to_frac(substitute(c, {R.var: n, **values}), names)
    else:
        conv = lambda v: v if isinstance(v, Fraction) else to_fraction(v)
        coeff = lambda c, n: evaluate(c, {R.var: n, **values})
    vals = [conv(v) for v in initials]
    if count <= len(vals):
        upto = len(vals)
    else:
        upto = count
    if len(vals) < r and upto > len(vals):
        raise InsufficientInitialValues(len(vals), f"need {r} initial values, got {len(vals)}")
    n = 0
    while n + r < upto:
        idx = n + r
        cs = [coeff(c, n) for c in R.coeffs]
        lead = cs[-1]
        if idx < len(vals):
            if lead:
                res = sum((cs[i] * vals[n + i] for i in range(r + 1)), conv(0))
                if res:
                    raise ValueError(f"initial value at index {idx} inconsistent with the recurrence")
        else:
            if not lead:
                raise InsufficientInitialValues(idx)
            acc = sum((cs[i] * vals[n + i] for i in range(r)), conv(0))
            vals.append(-acc / lead)
        n += 1
    return vals[:count]


def singular_indices(R: AnnihilatorRec, start: int = 0) -> list[int]:
    """Indices n + r (n >= start) whose value the recurrence leaves free."""
    from .exact import integer_roots
    lead = R.leading
    if used_symbols(lead) - {R.var}:
        return []
    if not used_symbols(lead):
        return []
    return sorted(n + R.order for n in integer_roots(lead) if n >= start)


def term_ring_names(*recs: AnnihilatorRec) -> tuple[str, ...]:
    return sort_symbols(set().union(*(r.names for r in recs)))


def constant_rec(var: str) -> AnnihilatorRec:
    """a(n+1) - a(n) = 0."""
    R = poly_ring((var,))
    return AnnihilatorRec(var, [-R.one, R.one])
