"""Hypergeometric summation: Gosper, Zeilberger, two-term closed forms, proofs."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import factorial
from typing import Sequence

from sympy.polys.fields import FracElement

from .exact import (
    coeffs_in,
    degree_in,
    dispersion,
    evaluate,
    frac_field,
    gen,
    integer_roots,
    names_of,
    nullspace,
    poly_ring,
    rational_roots,
    shift,
    sort_symbols,
    substitute,
    to_frac,
    to_fraction,
    to_poly,
    to_qq,
    used_symbols,
)
from .hyperterm import HyperTerm, TermSum, _form_key, term_to_rec
from .rec import AnnihilatorRec, unroll

DEFAULT_MAX_ORDER = 6


class OrderExceeded(RuntimeError):
    """No telescoping recurrence up to the requested order."""


@dataclass(frozen=True)
class NoSolution:
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class GosperCertificate:
    rational: FracElement
    term: HyperTerm
    var: str

    def antidifference(self) -> HyperTerm:
        """G = R * t with G(k+1) - G(k) = t(k)."""
        return self.term * HyperTerm.rat(self.rational)


@dataclass(frozen=True)
class ZeilbergerResult:
    recurrence: AnnihilatorRec
    certificate: FracElement
    term: HyperTerm
    n: str
    k: str

    @property
    def order(self) -> int:
        return self.recurrence.order


# --------------------------------------------------------------------------
# Gosper machinery

def gosper_form(a, b, k: str):
    """Split a/b = (A/B) * C(k+1)/C(k) with gcd(A(k), B(k+h)) = 1 for h >= 0."""
    names = sort_symbols(set(names_of(a)) | set(names_of(b)) | {k})
    A, B = to_poly(a, names), to_poly(b, names)
    C = A.ring.one
    for h in sorted(dispersion(A, B, k)):
        while True:
            g = A.gcd(shift(B, k, h))
            if k not in used_symbols(g):
                break
            A = A.exquo(g)
            B = B.exquo(shift(g, k, -h))
            for i in range(1, h + 1):
                C *= shift(g, k, -i)
    return A, B, C


def degree_bound(A, B1, rhs_degree: int, k: str) -> int:
    """Maximal degree of X in A(k) X(k+1) - B1(k) X(k) = rhs of the given degree."""
    plus, minus = A + B1, A - B1
    dp, dm = degree_in(plus, k), degree_in(minus, k)
    if dm >= dp:
        return rhs_degree - dm
    bound = rhs_degree - dp + 1
    lc = coeffs_in(plus, k)[dp]
    sub = coeffs_in(minus, k).get(dp - 1)
    if sub is not None and sub:
        d0 = -2 * to_frac(sub, names_of(lc)) / to_frac(lc, names_of(lc))
        if not used_symbols(d0):
            d0 = to_fraction(d0)
            if d0.denominator == 1 and d0 >= 0:
                bound = max(bound, int(d0))
    return bound


def _telescoper(t: HyperTerm, k: str, n: str | None, J: int):
    """Solve for sigma_0..sigma_J and X in the parametrized Gosper equation.

    Returns (sigmas, R) with  sum_j sigma_j t(n+j)/t(n) = R(k+1) r_k - R(k)
    where r_k is the k-ratio of t, or None when no nonzero sigma exists.
    """
    names = sort_symbols(set(t.names) | {k} | ({n} if n else set()))
    F = frac_field(names)
    Rg = F.ring
    rk = to_frac(t.ratio(k), names)
    # ratios t(n+j)/t(n) = U_j / V_j
    ratios = [F.one]
    if J:
        rn = to_frac(t.ratio(n), names)
        for j in range(1, J + 1):
            ratios.append(ratios[-1] * shift(rn, n, j - 1))
    L = reduce(lambda u, v: u.lcm(v), (r.denom for r in ratios), Rg.one)
    cs = [(r.numer * L).exquo(r.denom) for r in ratios]
    base = rk * F(L) / F(shift(L, k, 1))
    A, B, C = gosper_form(base.numer, base.denom, k)
    B1 = shift(B, k, -1)
    rhs_deg = degree_in(C, k) + max(degree_in(c, k) for c in cs)
    D = degree_bound(A, B1, rhs_deg, k)
    kk = gen(Rg, k)
    # unknown columns: x_0..x_D then sigma_0..sigma_J
    cols = []
    for i in range(D + 1):
        cols.append(A * (kk + 1) ** i - B1 * kk ** i)
    for c in cs:
        cols.append(-C * c)
    degs = {e for col in cols for e in coeffs_in(col, k)} if cols else set()
    split = [coeffs_in(col, k) for col in cols]
    rows = [[s.get(e, Rg.zero) for s in split] for e in sorted(degs)]
    rows = [r for r in rows if any(r)]
    basis = nullspace(rows) if rows else nullspace([], ncols=len(cols))
    nx = D + 1 if D >= 0 else 0
    basis = [v for v in basis if any(v[nx:])]
    if not basis:
        return None

    v = min(basis, key=lambda v: (sum(1 for p in v[nx:] if p), len(str(v))))
    v = [to_poly(p, names) for p in v]
    X = sum((v[i] * kk ** i for i in range(nx)), Rg.zero)
    sigmas = v[nx:]
    R = F(B1 * X) / F(C * L)
    return sigmas, R


def _check_certificate(t: HyperTerm, k: str, n: str | None, sigmas, R) -> bool:
    names = sort_symbols(set(names_of(R)) | set(t.names))
    F = frac_field(names)
    R = to_frac(R, names)
    rk = to_frac(t.ratio(k), names)
    lhs = F.zero
    ratio = F.one
    for j, s in enumerate(sigmas):
        if j:
            ratio *= shift(to_frac(t.ratio(n), names), n, j - 1)
        lhs += to_frac(s, names) * ratio
    return lhs == shift(R, k, 1) * rk - R


def gosper(t: HyperTerm, k: str = "k") -> GosperCertificate | NoSolution:
    """Indefinite summation: G with G(k+1) - G(k) = t(k), G = R*t, or NoSolution."""
    if t.is_zero():
        raise ValueError("zero term")
    found = _telescoper(t, k, None, 0)
    if found is None:
        return NoSolution(f"no hypergeometric antidifference in {k}")
    (s0,), R = found
    names = sort_symbols(set(names_of(R)) | set(names_of(s0)))
    R = to_frac(R, names) / to_frac(s0, names)
    assert _check_certificate(t, k, None, [1], R), "Gosper certificate check failed"
    return GosperCertificate(R, t, k)


def zeilberger(t: HyperTerm, n: str = "n", k: str = "k", max_order: int = DEFAULT_MAX_ORDER) -> ZeilbergerResult:
    """Creative telescoping: sum_j sigma_j(n) t(n+j,k) = G(n,k+1) - G(n,k)."""
    if t.is_zero():
        raise ValueError("zero term")
    for J in range(1, max_order + 1):
        found = _telescoper(t, k, n, J)
        if found is None:
            continue
        sigmas, R = found
        rec = AnnihilatorRec(n, sigmas)
        # carry the normalization of the sigmas over to the certificate
        top = max(j for j, s in enumerate(sigmas) if s)
        names = sort_symbols(set(names_of(R)) | set(rec.names))
        scale = to_frac(rec.coeffs[top], names) / to_frac(sigmas[top], names)
        R = to_frac(R, names) * scale
        assert _check_certificate(t, k, n, list(rec.coeffs), R), "telescoping certificate check failed"
        return ZeilbergerResult(rec, R, t, n, k)
    raise OrderExceeded(f"no recurrence of order <= {max_order} found")


# --------------------------------------------------------------------------
# brute-force oracle and proofs

def sum_oracle(t: HyperTerm | TermSum, n: int, var: str = "n", k: str = "k",
               values: dict | None = None) -> Fraction:
    """Sum over the finite k-support fixed by reciprocal factorials."""
    terms = t.terms if isinstance(t, TermSum) else (t,)
    point = {var: n, **(values or {})}
    total = Fraction(0)
    for term in terms:
        if k not in term.names:
            raise ValueError("unbounded support")
        low, high = term.reciprocal_bounds(k, point)
        if low is None or high is None:
            raise ValueError("unbounded support")
        for kv in range(low, high + 1):
            total += term.evaluate({**point, k: kv})
    return total


@dataclass(frozen=True)
class IdentityProof:
    verdict: str
    recurrence: AnnihilatorRec | None
    checked: tuple = ()
    lhs_recurrence: AnnihilatorRec | None = None
    rhs_recurrence: AnnihilatorRec | None = None
    reason: str = ""

    @property
    def proved(self) -> bool:
        return self.verdict == "proved"


def _side(t: HyperTerm, n: str, k: str, max_order: int):
    """Recurrence and value function of sum_k t (or of t itself when k-free)."""
    if k not in t.names:
        return term_to_rec(t, n), lambda v: t.evaluate({n: v})
    if not t.has_natural_boundaries(k):
        raise ValueError(f"summand has no natural boundaries in {k}")
    return zeilberger(t, n, k, max_order).recurrence, lambda v: sum_oracle(t, v, n, k)


def initial_indices(R: AnnihilatorRec) -> list[int]:
    """Indices whose values pin down a solution of R on n >= 0."""
    roots = sorted(r for r in integer_roots(R.leading) if r >= 0) if used_symbols(R.leading) else []
    top = R.order - 1 + len(roots)
    if roots:
        top = max(top, roots[-1] + R.order)
    return list(range(top + 1))


def prove_identity(lhs: HyperTerm, rhs: HyperTerm, n: str = "n", k: str = "k",
                   max_order: int = DEFAULT_MAX_ORDER) -> IdentityProof:
    """Prove sum_k lhs = sum_k rhs via a common recurrence and initial values.

    A side that does not involve ``k`` stands for itself, not for a sum.
    """
    A, fa = _side(lhs, n, k, max_order)
    B, fb = _side(rhs, n, k, max_order)
    if used_symbols(A.leading) - {n} or A.parameters() or B.parameters():
        return IdentityProof("inconclusive", None, (), A, B, "parametric recurrences")
    if A != B:
        return IdentityProof("inconclusive", None, (), A, B, "recurrences differ")
    checked = []
    for i in initial_indices(A):
        va, vb = fa(i), fb(i)
        checked.append((i, va))
        if va != vb:
            return IdentityProof("inconclusive", A, tuple(checked), A, B, f"values differ at {n} = {i}: {va} vs {vb}")
    return IdentityProof("proved", A, tuple(checked), A, B)


# --------------------------------------------------------------------------
# two-term recurrences

@dataclass(frozen=True)
class SymbolicProduct:
    """a(start + m*i) = value * prod_{t < i} ratio(t), kept unevaluated."""
    value: Fraction
    ratio: FracElement
    var: str

    def evaluate(self, i: int) -> Fraction:
        out = Fraction(self.value)
        for t in range(i):
            out *= evaluate(self.ratio, {self.var: t})
        return out


@dataclass(frozen=True)
class ClassSolution:
    residue: int
    start: int
    explicit: tuple = ()
    term: HyperTerm | SymbolicProduct | None = None

    def value(self, idx: int, modulus: int, var: str) -> Fraction:
        for i, v in self.explicit:
            if i == idx:
                return v
        i, rem = divmod(idx - self.start, modulus)
        if rem or i < 0:
            raise ValueError(f"index {idx} not in this class")
        if isinstance(self.term, SymbolicProduct):
            return self.term.evaluate(i)
        return self.term.evaluate({var: i})


@dataclass(frozen=True)
class ClosedForm:
    var: str
    modulus: int
    classes: tuple = field(default_factory=tuple)

    def __call__(self, idx: int) -> Fraction:
        return self.classes[idx % self.modulus].value(idx, self.modulus, self.var)

    def unroll(self, count: int) -> list[Fraction]:
        return [self(i) for i in range(count)]


def _class_term(rho_i, var: str):
    """Product H(i) = prod_{t<i} rho_i(t) as a HyperTerm in ``var``, or None."""
    names = (var,)
    R = poly_ring(names)
    F = frac_field(names)
    i = gen(R, var)
    num, den = to_poly(rho_i.numer, names), to_poly(rho_i.denom, names)
    base = to_fraction(num.LC) / to_fraction(den.LC)
    factors: dict[Fraction, int] = {}
    for poly, sign in ((num, 1), (den, -1)):
        roots = rational_roots(poly)
        if sum(roots.values()) != degree_in(poly, var):
            return None
        for r, m in roots.items():
            factors[-r] = factors.get(-r, 0) + sign * m
    rational = F.one
    facts = []
    groups: dict[int, dict[int, int]] = {}
    for b, e in factors.items():
        if not e:
            continue
        if b.denominator == 1:
            b = int(b)
            if b < 1:
                return None
            # prod_{t<i} (t+b) = (i+b-1)!/(b-1)!
            facts.append((i + (b - 1), e))
            rational /= F(factorial(b - 1)) ** e
            continue
        q, p = b.denominator, b.numerator
        r = p % q
        u = (p - r) // q
        base /= Fraction(q) ** e
        groups.setdefault(q, {})
        groups[q][r] = groups[q].get(r, 0) + e
        # prod_{t<i}(q t + p) = prod_{t<i}(q t + r) * corr(i)
        corr = F.one
        if u >= 0:
            for t in range(u):
                corr *= F(q * (i + t) + r) / F(q * t + r)
        else:
            for t in range(u, 0):
                corr *= F(q * t + r) / F(q * (i + t) + r)
        rational *= corr ** e
    for q, counts in groups.items():
        es = {counts.get(r, 0) for r in range(1, q)}
        if len(es) != 1:
            return None
        E = es.pop()
        if E:
            # prod_{r=1}^{q-1} prod_{t<i} (q t + r) = (q i)! / (q^i i!)
            facts += [(q * i, E), (i, -E)]
            base /= Fraction(q) ** E
    term = HyperTerm.make(rational, facts, [(base, i)] if base != 1 else [])
    return absorb_factors(merge_factorials(term))


def merge_factorials(t: HyperTerm) -> HyperTerm:
    """Rewrite factorials whose arguments differ by integers through the smallest.

    (L+d)! = L! (L+1)...(L+d).  Only used for closed forms over i >= 0 with
    nonnegative offsets, where both sides are defined.
    """
    F = frac_field(t.names)
    groups: dict = {}
    for form, e in t.factorials:
        const = to_fraction(form.get(form.ring.zero_monom, 0))
        key = (_form_key(form - form.ring(to_qq(const))), const - (const.numerator // const.denominator))
        groups.setdefault(key, []).append((form, const, e))
    rational = t.rational
    facts = []
    for members in groups.values():
        low_form, low, _ = min(members, key=lambda m: m[1])
        total = 0
        for form, c, e in members:
            for s in range(1, int(c - low) + 1):
                rational *= F(low_form + s) ** e
            total += e
        facts.append((low_form, total))
    return HyperTerm.make(rational, facts, t.geometric)


def absorb_factors(t: HyperTerm) -> HyperTerm:
    """Fold rational factors L+1 into a simple factorial: L! (L+1) = (L+1)!."""
    num, den = t.rational.numer, t.rational.denom
    facts = []
    for form, e in t.factorials:
        if abs(e) == 1:
            while True:
                side = num if e > 0 else den
                q, r = divmod(side, form + 1)
                if r or not used_symbols(form) or any(c.denominator != 1 for c in q.values()):
                    break
                if e > 0:
                    num = q
                else:
                    den = q
                form = form + 1
        facts.append((form, e))
    return HyperTerm.make(t.rational.field(num) / t.rational.field(den), facts, t.geometric)


def solve_two_term(R: AnnihilatorRec, initials: Sequence, values: dict | None = None) -> ClosedForm:
    """Closed forms per residue class for q_m(n) a(n+m) + q_0(n) a(n) = 0."""
    m = R.order
    if m < 1 or any(R.coeffs[1:m]) or not R.coeffs[0]:
        raise ValueError("expected exactly two nonzero coefficients q_0 and q_m")
    var = R.var
    qm, q0 = R.coeffs[m], R.coeffs[0]
    if R.parameters() - set(values or {}):
        raise ValueError("parametric two-term recurrences are not supported")
    if values:
        qm, q0 = substitute(qm, values), substitute(q0, values)
    lead_roots = sorted(r for r in integer_roots(qm) if r >= 0) if used_symbols(qm) else []
    zero_roots = sorted(r for r in integer_roots(q0) if r >= 0) if used_symbols(q0) else []
    starts = []
    for c in range(m):
        s = c
        for r in lead_roots:
            if r % m == c:
                s = max(s, r + m)
        starts.append(s)
    limit = max(starts) + 1
    for r in zero_roots:
        limit = max(limit, r + m + 1)
    vals = unroll(R, initials, max(limit, len(initials)), values)
    Fi = frac_field((var,))
    ivar = gen(Fi.ring, var)
    rho = -to_frac(q0, (var,)) / to_frac(qm, (var,))
    classes = []
    for c in range(m):
        s = starts[c]
        explicit = [(idx, vals[idx]) for idx in range(c, s, m)]
        a_s = vals[s]
        # a zero of q_0 at or after s kills the class from there on
        stop = next((r for r in zero_roots if r >= s and (r - s) % m == 0), None)
        if a_s == 0 or stop is not None:
            if stop is not None and a_s != 0:
                explicit += [(idx, vals[idx]) for idx in range(s, stop + 1, m)]
                s = stop + m
            classes.append(ClassSolution(c, s, tuple(explicit), HyperTerm.const(0)))
            continue
        rho_i = Fi(rho.numer.compose(gen(rho.numer.ring, var), m * ivar + s)) / \
            Fi(rho.denom.compose(gen(rho.denom.ring, var), m * ivar + s))
        term = _class_term(rho_i, var)
        if term is None:
            classes.append(ClassSolution(c, s, tuple(explicit), SymbolicProduct(a_s, rho_i, var)))
            continue
        term = term * HyperTerm.const(a_s / term.evaluate({var: 0}))
        if to_frac(term.ratio(var), (var,)) != rho_i:
            raise AssertionError("closed form ratio mismatch")
        classes.append(ClassSolution(c, s, tuple(explicit), term))
    return ClosedForm(var, m, tuple(classes))
