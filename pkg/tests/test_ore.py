from fractions import Fraction
from itertools import combinations
from math import comb

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomic.exact import poly_ring
from holonomic.hyperterm import term_to_rec
from holonomic.ore import (
    BudgetExceeded,
    OreAlgebra,
    RangeError,
    TermOrder,
    apply,
    eliminate,
    left_groebner,
    left_reduce,
    monomial,
    ore_mul,
    rec_to_ore,
    s_poly,
    specialize,
    sum_recurrence_via_elimination,
)
from holonomic.parser import parse_ore, parse_rec, parse_term
from oracles import legendre

PASCAL_ALG = OreAlgebra(("n", "k"), [("N", "shift", "n"), ("K", "shift", "k")])
PASCAL_ORDER = TermOrder.lex("k", "n", "K", "N")
LEG_ALG = OreAlgebra(("n", "x"), [("N", "shift", "n"), ("D", "diff", "x")])
LEG_ORDER = TermOrder.lex("D", "N", "n", "x")
SUM_ALG = OreAlgebra(("n", "k"), [("N", "shift", "n"), ("K", "shift", "k")], ["x"])


def P(text, alg=PASCAL_ALG):
    return parse_ore(text, alg)


def pascal():
    return [P("K*N - 1 - K"), P("(n+1-k)*N - (n+1)")]


def legendre_gens():
    return [P("(x^2-1)*D^2 + 2*x*D - n*(1+n)", LEG_ALG), P("(n+2)*N^2 - (3+2*n)*x*N + (n+1)", LEG_ALG)]


def in_basis(G, text, alg):
    target = P(text, alg)
    return any(_unit_multiple(g, target) for g in G)


def _unit_multiple(g, h):
    if set(g.terms) != set(h.terms):
        return False
    m = next(iter(g.terms))
    c = g.terms[m] / h.terms[m]
    return g == h.scale(c)


# --------------------------------------------------------------------------
# multiplication

def test_commutation_rules():
    D, x = LEG_ALG.gen("D"), LEG_ALG.gen("x")
    assert ore_mul(D, x) == x * D + 1
    K, k = PASCAL_ALG.gen("K"), PASCAL_ALG.gen("k")
    assert ore_mul(K, k) - k * K == K
    N = LEG_ALG.gen("N")
    assert ore_mul(N, x) == x * N
    n = LEG_ALG.gen("n")
    assert ore_mul(N ** 2, n ** 2) == (n + 2) ** 2 * N ** 2
    assert ore_mul(D ** 2, x ** 2) == x ** 2 * D ** 2 + 4 * x * D + 2


ALG3 = OreAlgebra(("n", "x"), [("N", "shift", "n"), ("D", "diff", "x")], ["a"])


@st.composite
def ore_polys(draw):
    terms = draw(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2),
                                    st.integers(-3, 3), st.booleans()), min_size=1, max_size=3))
    out = ALG3.zero()
    a = ALG3.gen("a")
    for en, ex, eN, eD, c, with_a in terms:
        m = monomial(ALG3, (en, ex, eN, eD), c)
        out = out + (ore_mul(a, m) if with_a else m)
    return out


@settings(max_examples=50, deadline=None)
@given(ore_polys(), ore_polys(), ore_polys())
def test_associativity_and_distributivity(a, b, c):
    assert ore_mul(ore_mul(a, b), c) == ore_mul(a, ore_mul(b, c))
    assert ore_mul(a, b + c) == ore_mul(a, b) + ore_mul(a, c)
    assert ore_mul(a + b, c) == ore_mul(a, c) + ore_mul(b, c)


# --------------------------------------------------------------------------
# reduction and Groebner bases

def test_reduce_examples():
    g = P("K*N - 1 - K")
    assert not left_reduce(g, [g], PASCAL_ORDER)
    alg = OreAlgebra(("n",), [("N", "shift", "n")])
    assert left_reduce(P("N^2", alg), [P("N - 2", alg)], TermOrder.lex("N", "n")) == alg.const(4)


@settings(max_examples=25, deadline=None)
@given(ore_polys())
def test_reduction_cofactor_identity(p):
    G = left_groebner(legendre_gens(), LEG_ORDER)
    gens = [rebase(g) for g in G]
    r, cof = left_reduce(p, gens, LEG_ORDER, cofactors=True)
    total = r
    for c, g in zip(cof, gens):
        total = total + ore_mul(c, g)
    assert total == p


def rebase(g):
    """Move an operator of LEG_ALG into ALG3 (same variables plus a parameter)."""
    out = ALG3.zero()
    for m, c in g.terms.items():
        out = out + monomial(ALG3, m, c)
    return out


def assert_groebner(G, gens, order):
    key = order.key_for(G[0].algebra)
    for f, g in combinations(G, 2):
        assert not left_reduce(s_poly(f, g, key), G, order)
    for g in gens:
        assert not left_reduce(g, G, order)


def test_pascal_groebner():
    G = left_groebner(pascal(), PASCAL_ORDER)
    assert in_basis(G, "(k+1)*K + k - n", PASCAL_ALG)
    assert in_basis(G, "(n+1-k)*N - (n+1)", PASCAL_ALG)
    assert in_basis(G, "K*N - 1 - K", PASCAL_ALG)
    assert len(G) == 3
    assert_groebner(G, pascal(), PASCAL_ORDER)


def test_legendre_groebner():
    G = left_groebner(legendre_gens(), LEG_ORDER)
    assert in_basis(G, "(x^2-1)*N*D - (1+n)*x*N + (1+n)", LEG_ALG)
    assert in_basis(G, "(1+n)*(x^2-1)*D - (1+n)^2*N + x*(1+n)^2", LEG_ALG)
    assert_groebner(G, legendre_gens(), LEG_ORDER)


def test_single_generator_is_normalized():
    assert left_groebner([P("2*K - 4")], PASCAL_ORDER) == [P("K - 2")]


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        left_groebner(legendre_gens(), LEG_ORDER, budget=2)


def test_eliminate_examples():
    E = eliminate(pascal(), ["N"], PASCAL_ORDER)
    assert in_basis(E, "(k+1)*K + k - n", PASCAL_ALG)
    assert all("N" not in g.variables() for g in E)
    alg = OreAlgebra(("n", "k"), [("N", "shift", "n"), ("K", "shift", "k")])
    assert eliminate([P("N - 2", alg)], ["K"]) == [P("N - 2", alg)]
    with pytest.raises(ValueError):
        eliminate(pascal(), [])


def test_eliminate_binomial_legendre_summand():
    gens = [P("(n-k+1)*N - (1+n)", SUM_ALG),
            P("(2+k)^2*K^2 - (3+2*k)*(n-k-1)*x*K + (n-k)*(n-k-1)", SUM_ALG)]
    E = eliminate(gens, ["k"], TermOrder.lex("k", "n", "K", "N"))
    expected = "(2+n)^2*K^2*N^2 - K*(2+n)*(3+2*n)*(K+x)*N + (1+n)*(2+n)*(1+K^2+2*K*x)"
    assert in_basis(E, expected, SUM_ALG)


# --------------------------------------------------------------------------
# applying operators to tables

def binomial_table(size=12):
    return {(a, b): Fraction(comb(a, b)) for a in range(size) for b in range(size)}


def test_apply_examples():
    alg = OreAlgebra(("n",), [("N", "shift", "n")])
    powers = {(i,): Fraction(2 ** i) for i in range(10)}
    assert set(apply(P("N - 2", alg), powers, ("n",)).values()) == {0}
    table = binomial_table(9)
    for text in ("(n+1-k)*N - (n+1)", "K*N - 1 - K"):
        out = apply(P(text), table, ("n", "k"))
        assert out and set(out.values()) == {0}
    with pytest.raises(RangeError):
        apply(P("N - 2", alg), powers, ("n",), points=[(9,)])


def test_pascal_basis_annihilates_binomials():
    table = binomial_table()
    for g in left_groebner(pascal(), PASCAL_ORDER):
        out = apply(g, table, ("n", "k"))
        assert len(out) >= 100 and set(out.values()) == {0}


def test_legendre_basis_annihilates_polynomials():
    R = poly_ring(("x",))
    table = {(i,): R.from_expr(legendre(i, sympy.Symbol("x"))) for i in range(13)}
    for g in left_groebner(legendre_gens(), LEG_ORDER):
        out = apply(g, table, ("n",))
        assert len(out) >= 10 and all(not v for v in out.values())


def test_legendre_derivative_relations():
    x = sympy.Symbol("x")
    for i in range(9):
        p0, p1 = legendre(i, x), legendre(i + 1, x)
        assert sympy.expand((x ** 2 - 1) * sympy.diff(p1, x) - (1 + i) * (x * p1 - p0)) == 0
        assert sympy.expand((x ** 2 - 1) * sympy.diff(p0, x) - (1 + i) * (p1 - x * p0)) == 0


# --------------------------------------------------------------------------
# sums via elimination

def test_specialize():
    p = P("K*N - 1 - K")
    assert specialize(p, "K", 1) == P("N - 2")


def test_rec_to_ore():
    assert rec_to_ore(PASCAL_ALG, parse_rec("(k+1)*K + k - n", var="k")) == P("(k+1)*K + k - n")
    with pytest.raises(ValueError):
        rec_to_ore(LEG_ALG, parse_rec("K - 1", var="k"))


def test_sum_recurrence_binomial_legendre():
    recs = [parse_rec("(n-k+1)*N - (1+n)", var="n"),
            parse_rec("(2+k)^2*K^2 - (3+2*k)*(n-k-1)*x*K + (n-k)*(n-k-1)", var="k")]
    S = sum_recurrence_via_elimination(recs)
    assert S.recurrence == parse_rec("(2+n)*N^2 - (3+2*n)*(1+x)*N + 2*(1+n)*(1+x)")
    xs = sympy.Symbol("x")
    for xv in (Fraction(0), Fraction(1, 2), Fraction(-2, 3)):
        at = sympy.Rational(xv.numerator, xv.denominator)
        sums = [Fraction(str(sum(comb(m, j) * legendre(j, xs).subs(xs, at) for j in range(m + 1))))
                for m in range(13)]
        assert all(S.recurrence.residual(sums, m, {"x": xv}) == 0 for m in range(11))


def test_sum_recurrence_row_sums():
    t = parse_term("binomial(n,k)").single()
    S = sum_recurrence_via_elimination([term_to_rec(t, "n"), term_to_rec(t, "k")])
    assert S.recurrence == parse_rec("N - 2")


def test_sum_recurrence_k_free_input():
    S = sum_recurrence_via_elimination([parse_rec("N - 2"), parse_rec("K - 1", var="k")])
    assert S.recurrence == parse_rec("N - 2")
