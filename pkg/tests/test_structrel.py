from fractions import Fraction

import pytest
import sympy

from holonomic.exact import frac_field, poly_ring, to_frac, used_symbols
from holonomic.families import jacobi_system, legendre_system
from holonomic.hypersum import NoSolution
from holonomic.ore import OreAlgebra, TermOrder, left_groebner, left_reduce, monomial
from holonomic.parser import parse_ore, parse_rec
from holonomic.structrel import (
    DerivativeRule,
    HolonomicSystem,
    ShapeTerm,
    StructureRelation,
    find_structure_relation,
    instances,
    verify_relation_numeric,
)
from oracles import jacobi, legendre

X = poly_ring(("x",)).gens[0]
JF = frac_field(("n", "alpha", "beta"))
n, a, b = (JF(g) for g in JF.ring.gens)

JACOBI_SHAPE = [ShapeTerm(0, 0, fixed=True), ShapeTerm(1, -1), ShapeTerm(1, 0), ShapeTerm(1, 1)]
LEGENDRE_SHAPE = [ShapeTerm(1, 1, X ** 2 - 1, fixed=True), ShapeTerm(0, 1, X), ShapeTerm(0, 0)]


@pytest.fixture(scope="module")
def jacobi_relation():
    return find_structure_relation(jacobi_system(), JACOBI_SHAPE)


def test_jacobi_coefficients(jacobi_relation):
    rhs = {key: to_frac(c, ("n", "alpha", "beta")) for key, c in jacobi_relation.rhs().items()}
    s = a + b
    assert rhs[(1, -1)] == -2 * (a + n) * (b + n) / ((s + n) * (s + 2 * n) * (s + 2 * n + 1))
    assert rhs[(1, 0)] == 2 * (a - b) / ((s + 2 * n) * (s + 2 * n + 2))
    assert rhs[(1, 1)] == 2 * (s + n + 1) / ((s + 2 * n + 1) * (s + 2 * n + 2))


def test_coefficients_are_free_of_x(jacobi_relation):
    for c in jacobi_relation.coeffs:
        assert "x" not in used_symbols(c)


@pytest.mark.parametrize("alpha,beta", [(Fraction(1, 2), Fraction(1, 3)), (Fraction(2), Fraction(5)), (Fraction(0), Fraction(0))])
def test_jacobi_relation_verifies(jacobi_relation, alpha, beta):
    report = verify_relation_numeric(jacobi_relation, jacobi_system(), 10, values={"alpha": alpha, "beta": beta})
    assert report.ok and report.checked >= 40


def test_jacobi_inputs_match_reference_polynomials():
    x = sympy.Symbol("x")
    values = {"alpha": Fraction(1, 2), "beta": Fraction(1, 3)}
    polys = instances(jacobi_system(), 6, values)
    for i, p in enumerate(polys):
        ref = jacobi(i, sympy.Rational(1, 2), sympy.Rational(1, 3), x)
        assert sympy.expand(p.as_expr() - ref) == 0
    # derivative rule: (2n+s)(1-x^2) P_n' = n[a-b-(2n+s)x] P_n + 2(n+a)(n+b) P_{n-1}
    al, be = sympy.Rational(1, 2), sympy.Rational(1, 3)
    for i in range(1, 6):
        s = al + be
        lhs = (2 * i + s) * (1 - x ** 2) * sympy.diff(jacobi(i, al, be, x), x)
        rhs = i * (al - be - (2 * i + s) * x) * jacobi(i, al, be, x) + 2 * (i + al) * (i + be) * jacobi(i - 1, al, be, x)
        assert sympy.expand(lhs - rhs) == 0


def test_legendre_relation():
    rel = find_structure_relation(legendre_system(), LEGENDRE_SHAPE)
    rhs = rel.rhs()
    F = frac_field(("n",))
    m = F(F.ring.gens[0])
    assert to_frac(rhs[(0, 1)], ("n",)) == m + 1
    assert to_frac(rhs[(0, 0)], ("n",)) == -(m + 1)
    assert verify_relation_numeric(rel, legendre_system(), 9).ok


def test_legendre_relation_lies_in_the_ideal():
    rel = find_structure_relation(legendre_system(), LEGENDRE_SHAPE)
    alg = OreAlgebra(("n", "x"), [("N", "shift", "n"), ("D", "diff", "x")])
    order = TermOrder.lex("D", "N", "n", "x")
    op = alg.zero()
    for t, c in zip(rel.terms, rel.coeffs):
        if not c:
            continue
        op = op + alg.from_poly(c) * alg.from_poly(t.multiplier) * monomial(alg, (0, 0, t.shift, t.derivative))
    gens = [parse_ore("(x^2-1)*D^2 + 2*x*D - n*(1+n)", alg), parse_ore("(n+2)*N^2 - (3+2*n)*x*N + (n+1)", alg)]
    assert not left_reduce(op, left_groebner(gens, order), order)


def test_legendre_instances():
    x = sympy.Symbol("x")
    for i, p in enumerate(instances(legendre_system(), 10)):
        assert sympy.expand(p.as_expr() - legendre(i, x)) == 0


def test_single_term_shape_has_no_solution():
    result = find_structure_relation(legendre_system(), [ShapeTerm(0, 0, fixed=True)])
    assert isinstance(result, NoSolution)


def test_zero_relation_verifies():
    rel = StructureRelation((), ())
    assert verify_relation_numeric(rel, legendre_system(), 5).ok


def test_custom_system_from_parts():
    # F(n, x) = x^n: F(n+1) = x F(n) and F'(n) = n F(n-1)
    R = poly_ring(("n", "x"))
    nn, x = R.gens
    rec = parse_rec("N - x")
    rule = DerivativeRule((nn, R.zero), offset=-1)
    sys_ = HolonomicSystem(rec, "x", None, rule, {(0, 0): R.one})
    rel = find_structure_relation(sys_, [ShapeTerm(1, 1, fixed=True), ShapeTerm(0, 0)])
    assert to_frac(rel.rhs()[(0, 0)], ("n",)) == frac_field(("n",))(frac_field(("n",)).ring.gens[0] + 1)
    assert verify_relation_numeric(rel, sys_, 8).ok


def test_insufficient_initial_data():
    sys_ = legendre_system()
    bare = HolonomicSystem(sys_.rec, "x", None, sys_.rule, {(0, 0): 1})
    rel = find_structure_relation(bare, LEGENDRE_SHAPE)
    with pytest.raises(ValueError, match="insufficient initial data"):
        verify_relation_numeric(rel, bare, 4)


def test_rule_validation():
    with pytest.raises(ValueError):
        DerivativeRule((0, 0))
    with pytest.raises(ValueError):
        find_structure_relation(legendre_system(), [])
