"""Holonomic differential operators.

``AnnihilatorODE`` with coefficients p_0..p_r and optional ``inhom`` encodes

    p_r(x) f^(r)(x) + ... + p_0(x) f(x) = inhom(x).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

from .exact import (
    PolyElement,
    coeffs_in,
    diff,
    frac_field,
    gen,
    poly_ring,
    sort_symbols,
    to_frac,
    to_poly,
    union_names,
    used_symbols,
)
from .operators import minimal_ansatz, normalize_coeffs, shrink
from .rec import AnnihilatorRec, InsufficientInitialValues, unroll


class AnnihilatorODE:
    """Linear differential operator with polynomial coefficients."""

    __slots__ = ("var", "coeffs", "inhom")

    def __init__(self, var: str, coeffs: Sequence, inhom=None, normalize: bool = True):
        if normalize:
            coeffs, inhom = normalize_coeffs(var, coeffs, inhom)
            coeffs, inhom = shrink(coeffs, inhom, keep=(var,))
        else:
            names = sort_symbols(set(union_names(*coeffs)) | {var})
            coeffs = tuple(to_poly(c, names) for c in coeffs)
            inhom = None if inhom is None else to_poly(inhom, names)
        self.var = var
        self.coeffs: tuple[PolyElement, ...] = tuple(coeffs)
        self.inhom = inhom if inhom else None

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def homogeneous(self) -> bool:
        return self.inhom is None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(str(s) for s in self.coeffs[0].ring.symbols)

    def __eq__(self, other):
        if not isinstance(other, AnnihilatorODE):
            return NotImplemented
        if self.var != other.var or self.order != other.order:
            return False
        names = union_names(self.coeffs[0], other.coeffs[0])
        if (self.inhom is None) != (other.inhom is None):
            return False
        if self.inhom is not None and to_poly(self.inhom, names) != to_poly(other.inhom, names):
            return False
        return all(to_poly(a, names) == to_poly(b, names) for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.var, tuple(str(c) for c in self.coeffs), str(self.inhom)))

    def __repr__(self):
        from .render import render_ode
        return f"AnnihilatorODE({render_ode(self)})"

    def apply(self, f):
        """Apply to a polynomial or rational function ``f`` in ``var``."""
        names = sort_symbols(set(self.names) | set(union_names(f)))
        f = to_frac(f, names)
        out = f.field.zero
        d = f
        for c in self.coeffs:
            out += to_frac(c, names) * d
            d = diff(d, self.var)
        return out


@dataclass(frozen=True)
class InitialValuesODE:
    """Values f(point), f'(point), f''(point), ... at the expansion point."""

    values: tuple = ()
    point: Fraction = field(default=Fraction(0))

    @classmethod
    def from_taylor(cls, coeffs: Sequence) -> "InitialValuesODE":
        return cls(tuple(Fraction(c) * factorial(i) for i, c in enumerate(coeffs)))

    def taylor(self) -> list[Fraction]:
        return [Fraction(v) / factorial(i) for i, v in enumerate(self.values)]


def _require_homogeneous(*ops: AnnihilatorODE):
    for A in ops:
        if not A.homogeneous:
            raise ValueError("closure operations require homogeneous operators")


def _derivative_step(A: AnnihilatorODE, F, var: str):
    """next(v): coordinates of g' for g = sum v_i f^(i), reduced modulo A."""
    r = A.order
    names = tuple(str(s) for s in F.symbols)
    lead = to_frac(A.coeffs[-1], names)
    red = [-to_frac(p, names) / lead for p in A.coeffs[:-1]]

    def step(v):
        w = [diff(c, var) for c in v]
        for i, c in enumerate(v):
            if not c:
                continue
            if i + 1 < r:
                w[i + 1] += c
            else:
                for l in range(r):
                    w[l] += c * red[l]
        return w

    return step


def _common(A: AnnihilatorODE, B: AnnihilatorODE):
    if A.var != B.var:
        raise ValueError(f"variables differ: {A.var} vs {B.var}")
    _require_homogeneous(A, B)
    if A.order < 1 or B.order < 1:
        raise ValueError("closure requires order >= 1")
    names = sort_symbols(set(A.names) | set(B.names))
    return names, frac_field(names)


def sum_vectors(A: AnnihilatorODE, B: AnnihilatorODE):
    names, F = _common(A, B)
    stepA, stepB = _derivative_step(A, F, A.var), _derivative_step(B, F, B.var)
    cache = [([F.one] + [F.zero] * (A.order - 1), [F.one] + [F.zero] * (B.order - 1))]

    def vectors(s):
        while len(cache) <= s:
            va, vb = cache[-1]
            cache.append((stepA(va), stepB(vb)))
        return cache[s][0] + cache[s][1]

    return vectors, names


def product_vectors(A: AnnihilatorODE, B: AnnihilatorODE):
    names, F = _common(A, B)
    ra, rb, x = A.order, B.order, A.var
    stepA, stepB = _derivative_step(A, F, x), _derivative_step(B, F, x)
    unit = lambda r, i: [F.one if l == i else F.zero for l in range(r)]
    upA = [stepA(unit(ra, i)) for i in range(ra)]
    upB = [stepB(unit(rb, j)) for j in range(rb)]

    def step(M):
        out = [[diff(c, x) for c in row] for row in M]
        for i in range(ra):
            for j in range(rb):
                c = M[i][j]
                if not c:
                    continue
                # (f^(i) g^(j))' = f^(i+1) g^(j) + f^(i) g^(j+1)
                for p, u in enumerate(upA[i]):
                    if u:
                        out[p][j] += c * u
                for q, w in enumerate(upB[j]):
                    if w:
                        out[i][q] += c * w
        return out

    cache = [[[F.one if (i, j) == (0, 0) else F.zero for j in range(rb)] for i in range(ra)]]

    def vectors(s):
        while len(cache) <= s:
            cache.append(step(cache[-1]))
        return [e for row in cache[s] for e in row]

    return vectors, names


def substitute_vectors(A: AnnihilatorODE, r):
    _require_homogeneous(A)
    x = A.var
    names = sort_symbols(set(A.names) | set(union_names(r)) | {x})
    F = frac_field(names)
    r = to_frac(r, names)
    if x not in used_symbols(r):
        raise ValueError("substitution must be nonconstant")
    ord_ = A.order
    comp = [_compose(to_frac(p, names), x, r) for p in A.coeffs]
    red = [-c / comp[-1] for c in comp[:-1]]
    dr = diff(r, x)

    def step(v):
        # d/dx [c(x) f^(i)(r(x))] = c' f^(i)(r) + c r' f^(i+1)(r)
        w = [diff(c, x) for c in v]
        for i, c in enumerate(v):
            if not c:
                continue
            if i + 1 < ord_:
                w[i + 1] += c * dr
            else:
                for l in range(ord_):
                    w[l] += c * dr * red[l]
        return w

    cache = [[F.one] + [F.zero] * (ord_ - 1)]

    def vectors(s):
        while len(cache) <= s:
            cache.append(step(cache[-1]))
        return cache[s]

    return vectors, names


def _compose(p, x: str, r):
    """p(r) for p a rational function in x (other symbols untouched)."""
    F = p.field

    def comp_poly(q):
        out = F.zero
        for e, c in coeffs_in(q, x).items():
            out += F(c) * r ** e
        return out

    return comp_poly(p.numer) / comp_poly(p.denom)


def ode_sum(A: AnnihilatorODE, B: AnnihilatorODE) -> AnnihilatorODE:
    """Minimal-order operator annihilating f + g for f in ker A, g in ker B."""
    vectors, names = sum_vectors(A, B)
    return AnnihilatorODE(A.var, minimal_ansatz(vectors, A.order + B.order, names))


def ode_product(A: AnnihilatorODE, B: AnnihilatorODE) -> AnnihilatorODE:
    """Minimal-order operator annihilating f * g for f in ker A, g in ker B."""
    vectors, names = product_vectors(A, B)
    return AnnihilatorODE(A.var, minimal_ansatz(vectors, A.order * B.order, names))


def ode_substitute(A: AnnihilatorODE, r) -> AnnihilatorODE:
    """Operator annihilating f(r(x)) for f in ker A and rational r."""
    vectors, names = substitute_vectors(A, r)
    return AnnihilatorODE(A.var, minimal_ansatz(vectors, A.order, names))


def homogenize(A: AnnihilatorODE) -> AnnihilatorODE:
    """Clear the right-hand side c(x), raising the order by one.

    L f = c  implies  (c D - c') L f = c c' - c' c = 0.
    """
    if A.homogeneous:
        return A
    x = A.var
    names = A.names
    c = to_poly(A.inhom, names)
    dc = diff(c, x)
    L = list(A.coeffs)
    # c * D(L) - c' * L,  with D(L) = sum p_i' D^i + p_i D^(i+1)
    DL = [A.coeffs[0].ring.zero] * (len(L) + 1)
    for i, p in enumerate(L):
        DL[i] += diff(p, x)
        DL[i + 1] += p
    out = [c * d for d in DL]
    for i, p in enumerate(L):
        out[i] -= dc * p
    return AnnihilatorODE(x, out)


# --------------------------------------------------------------------------
# power series <-> recurrence

def _falling(R, n, t: int, i: int):
    """(n + t)(n + t - 1)...(n + t - i + 1)."""
    out = R.one
    for l in range(i):
        out *= n + (t - l)
    return out


def _rec_data(A: AnnihilatorODE, index: str):
    """Coefficients q_t(n) and the offset s0 of the Taylor-coefficient recurrence.

    sum_t q_t(n) a(n+t) = 0 is the coefficient of x^(n - s0) in A(f), so it
    holds for every n >= s0 with a(m) = 0 for m < 0.
    """
    if not A.homogeneous:
        raise ValueError("ode_to_rec requires a homogeneous operator")
    x = A.var
    params = [s for s in A.names if s != x]
    if index in params or index == x:
        raise ValueError(f"index symbol {index!r} clashes with operator symbols")
    terms = []  # (i, j, coefficient poly in params)
    for i, p in enumerate(A.coeffs):
        for j, c in coeffs_in(p, x).items():
            if c:
                terms.append((i, j, c))
    s0 = min(i - j for i, j, _ in terms)
    top = max(i - j for i, j, _ in terms) - s0
    if top == 0:
        # keep order >= 1: write n*a(n) = 0 as (n+1)*a(n+1) = 0
        s0 -= 1
        top = 1
    names = sort_symbols(set(params) | {index})
    R = poly_ring(names)
    n = gen(R, index)
    q = [R.zero] * (top + 1)
    for i, j, c in terms:
        t = i - j - s0
        q[t] += to_poly(c, names) * _falling(R, n, t, i)
    return q, s0


def ode_to_rec(A: AnnihilatorODE, index: str = "n") -> AnnihilatorRec:
    """Recurrence for the Taylor coefficients at 0 of solutions of ``A``.

    Valid for every n >= 0 with the convention a(m) = 0 for m < 0.
    """
    q, _ = _rec_data(A, index)
    return AnnihilatorRec(index, q)


def _series(A: AnnihilatorODE, taylor: list, count: int) -> list:
    """Unroll from the first equation index, so that low-order equations
    (which ``ode_to_rec`` drops for n < 0) also constrain the values."""
    q, s0 = _rec_data(A, "n")
    pad = max(0, -s0)
    if pad:
        n = gen(q[0].ring, "n")
        q = [c.compose(n, n - pad) for c in q]
    R = AnnihilatorRec("n", q, normalize=False)
    try:
        vals = unroll(R, [Fraction(0)] * pad + taylor, count + pad)
    except InsufficientInitialValues as exc:
        raise InsufficientInitialValues(
            exc.index - pad, f"insufficient initial values: a({exc.index - pad}) is not determined") from exc
    except ValueError as exc:
        raise ValueError(f"initial values inconsistent with the equation ({exc})") from exc
    return vals[pad:]


def _stirling2(d: int, l: int) -> int:
    return sum((-1) ** (l - i) * comb(l, i) * i ** d for i in range(l + 1)) // factorial(l)


def rec_to_ode(R: AnnihilatorRec, initials: Sequence = (), var: str = "x") -> AnnihilatorODE:
    """Differential equation for the generating function sum a(n) x^n.

    Boundary terms from the initial values a(0..r-1) form the right-hand side;
    ``homogenize`` clears it.
    """
    n = R.var
    params = [s for s in R.names if s != n]
    if var in params or var == n:
        raise ValueError(f"variable {var!r} clashes with recurrence symbols")
    r = R.order
    names = sort_symbols(set(params) | {var})
    P = poly_ring(names)
    X = gen(P, var)
    Rn = R.ring
    nn = gen(Rn, n)
    # sum_n q_i(n) a(n+i) x^n = x^-i [q_i(theta - i) f - sum_{m<i} q_i(m - i) a_m x^m]
    coeffs = [P.zero] * 1
    rhs = P.zero
    init = [Fraction(v) for v in initials]
    for i, q in enumerate(R.coeffs):
        if not q:
            continue
        qs = q.compose(nn, nn - i)
        for d, c in coeffs_in(qs, n).items():
            c = to_poly(c, sort_symbols(set(names) | {n}))
            c = to_poly(c, names)
            # theta^d = sum_l S(d, l) x^l D^l
            for l in range(d + 1):
                s = _stirling2(d, l)
                if not s:
                    continue
                while len(coeffs) <= l:
                    coeffs.append(P.zero)
                coeffs[l] += c * s * X ** (r - i + l)
        for m in range(i):
            val = q.compose(nn, Rn(m - i))
            if not val:
                continue
            if m >= len(init):
                raise InsufficientInitialValues(m, f"initial value a({m}) required for the boundary terms")
            rhs += to_poly(val, names) * init[m] * X ** (r - i + m)
    return AnnihilatorODE(var, coeffs, rhs if rhs else None)


def taylor_coeffs(A: AnnihilatorODE, iv: InitialValuesODE, count: int) -> list[Fraction]:
    """Exact Taylor coefficients a_0..a_{count-1} at 0."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if iv.point != 0:
        raise ValueError("expansion point must be 0; shift with ode_substitute(A, x + c)")
    return _series(A, iv.taylor(), count)


def series_solution(A: AnnihilatorODE, taylor: Sequence, count: int) -> list[Fraction]:
    """Like ``taylor_coeffs`` but starting from Taylor coefficients."""
    return _series(A, [Fraction(c) for c in taylor], count)
