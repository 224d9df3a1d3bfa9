"""Shared machinery for one-variable annihilating operators."""
from __future__ import annotations

from typing import Callable, Sequence

from .exact import (
    PolyElement,
    gen,
    integer_roots,
    poly_ring,
    var_index,
    frac_field,
    normalize_vector,
    nullspace,
    sort_symbols,
    to_frac,
    to_poly,
    union_names,
    used_symbols,
)


def normalize_coeffs(var: str, coeffs: Sequence, inhom=None, discrete: bool = False):
    """Content-normalize an operator coefficient list (plus optional rhs).

    Trailing zeros are trimmed; denominators and the common polynomial gcd
    are removed; the leading coefficient gets a positive leading term.  For
    recurrences (``discrete``) common factors (var - r) with integer r >= 0 are
    kept, since dropping them would change which values are free.
    Returns (coeffs tuple, inhom or None) as polynomials in one ring.
    """
    items = list(coeffs)
    while items and not items[-1]:
        items.pop()
    if not items:
        raise ValueError("zero operator")
    names = set(union_names(*items, *(() if inhom is None else (inhom,))))
    names.add(var)
    names = sort_symbols(names)
    vec = [to_frac(c, names) for c in reversed(items)]
    has_rhs = inhom is not None and bool(inhom)
    if has_rhs:
        vec.append(to_frac(inhom, names))
    protected = _protected_factor(vec, var, names) if discrete else None
    vec = normalize_vector(vec)
    if protected is not None:
        vec = [v * protected for v in vec]
    # normalize_vector fixes the sign of the first entry, i.e. the leading coeff
    rhs = vec.pop() if has_rhs else None
    out = tuple(to_poly(c, names) for c in reversed(vec))
    if rhs is not None:
        rhs = to_poly(rhs, names)
    return out, rhs


def _protected_factor(vec, var, names):
    """Product of (var - r)^m, r >= 0 integer, dividing every entry of ``vec``."""
    from functools import reduce

    R = poly_ring(names)
    F = frac_field(names)
    polys = [(f * F(f.denom)).numer for f in vec if f]
    g = reduce(lambda u, v: u.gcd(v), polys)
    if g.is_ground or var not in used_symbols(g):
        return None
    # the var-only content of g carries every candidate root
    parts = {}
    i = var_index(R, var)
    for monom, c in g.items():
        key = monom[:i] + monom[i + 1:]
        parts.setdefault(key, {})[tuple(e if l == i else 0 for l, e in enumerate(monom))] = c
    u = reduce(lambda a, b: a.gcd(b), (R.from_dict(d) for d in parts.values()))
    if u.is_ground:
        return None
    x = gen(R, var)
    out = R.one
    for r in sorted(integer_roots(u)):
        if r < 0:
            continue
        while True:
            q, rem = divmod(g, x - r)
            if rem:
                break
            g = q
            out *= x - r
    return None if out == 1 else out


def shrink(coeffs: Sequence[PolyElement], inhom=None, keep: Sequence[str] = ()):
    """Move coefficients into the smallest interned ring containing them."""
    used = set(keep)
    for c in coeffs:
        used |= used_symbols(c)
    if inhom is not None:
        used |= used_symbols(inhom)
    names = sort_symbols(used)
    return tuple(to_poly(c, names) for c in coeffs), (None if inhom is None else to_poly(inhom, names))


def minimal_ansatz(vectors: Callable[[int], list], bound: int, names):
    """Search for the first linear dependency among ``vectors(0..s)``.

    ``vectors(i)`` returns the coordinate vector (rational functions) of the
    i-th derivative/shift in a fixed finite basis.  Tries s = 1, 2, ...,
    ``bound``; the first nontrivial nullspace gives the operator.  Among several
    solutions the one of least total coefficient degree is chosen.
    Returns the coefficient list c_0..c_s or None.
    """
    cols = []
    for s in range(0, bound + 1):
        cols.append(vectors(s))
        if s == 0:
            continue
        sol = dependency(cols, names)
        if sol is not None:
            return sol
    return None


def dependency(cols: list[list], names):
    """Solve sum_i c_i * cols[i] = 0 with c_last != 0, or return None."""
    nrows = len(cols[0])
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]
    rows = [r for r in rows if any(r)]
    if not rows:
        basis = nullspace([[0] * len(cols)])
    else:
        basis = nullspace(rows)
    basis = [v for v in basis if v[-1]]
    if not basis:
        return None

    def cost(v):
        return (sum(max(sum(m) for m in p.keys()) for p in v if p), sum(1 for p in v if p))

    return min(basis, key=cost)


def field_for(*objs, extra=()):
    return frac_field(set(union_names(*objs)) | set(extra))
