from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomic.exact import (
    diff,
    dispersion,
    echelon,
    evaluate,
    frac_field,
    integer_roots,
    mat_vec,
    normalize_vector,
    nullspace,
    poly_gcd,
    poly_ring,
    primitive,
    rank,
    rational_roots,
    shift,
    sort_symbols,
    substitute,
    to_frac,
    to_fraction,
)

R = poly_ring(("n", "k", "x"))
n, k, x = R.gens
F = frac_field(("n", "k", "x"))
Rn = poly_ring(("n",))

small = st.integers(-4, 4)


@st.composite
def polys(draw, ring=R, max_terms=4, max_deg=2):
    terms = draw(st.lists(st.tuples(*(st.integers(0, max_deg) for _ in ring.gens), small),
                          min_size=1, max_size=max_terms))
    p = ring.zero
    for *exps, c in terms:
        m = ring.one
        for g, e in zip(ring.gens, exps):
            m *= g ** e
        p += c * m
    return p


@st.composite
def linear_products(draw, var="k", max_factors=4):
    """Products of (var + c) with small integer c, as univariate polynomials."""
    ring = poly_ring((var,))
    v = ring.gens[0]
    cs = draw(st.lists(st.integers(-6, 6), min_size=1, max_size=max_factors))
    p = ring.one
    for c in cs:
        p *= v + c
    return p, cs


# --------------------------------------------------------------------------
# examples

def test_gcd_examples():
    assert poly_gcd(x ** 2 - 1, x - 1) == x - 1
    assert poly_gcd(n ** 2 + n, n + 1) == n + 1
    assert poly_gcd((n - k) * (n + 1), (n + 1) ** 2) == n + 1
    assert poly_gcd(R.zero, R.zero) == 0


def test_nullspace_examples():
    assert nullspace([[1, 0], [0, 1]]) == []
    (v,) = nullspace([[1, 1]])
    assert [to_fraction(e) for e in v] == [1, -1]
    (v,) = nullspace([[n, n ** 2]])
    assert v[0] == n.set_ring(v[0].ring) and v[1] == -1


def test_integer_roots_examples():
    assert integer_roots(Rn.gens[0] ** 2 - 1) == {-1, 1}
    m = Rn.gens[0]
    assert integer_roots((m + 1) * (2 * m + 1)) == {-1}
    assert integer_roots(m ** 3 - 6 * m ** 2 + 11 * m - 6) == {1, 2, 3}
    with pytest.raises(ValueError):
        integer_roots(Rn.zero)


def test_rational_roots_multiplicity():
    m = Rn.gens[0]
    assert rational_roots((2 * m + 1) ** 2 * (m - 3)) == {Fraction(-1, 2): 2, Fraction(3): 1}


def test_dispersion_examples():
    Rk = poly_ring(("k",))
    kk = Rk.gens[0]
    assert dispersion(kk, kk, "k") == {0}
    assert dispersion(kk, kk - 3, "k") == {3}
    assert dispersion(kk * (kk - 2), kk - 5, "k") == {3, 5}
    with pytest.raises(ValueError):
        dispersion(Rk.zero, kk, "k")


def test_dispersion_with_parameter_is_identical_in_it():
    # gcd(k + n, k + j) is nonconstant only for the parameter value n = j
    assert dispersion(k + n, k, "k") == set()
    assert dispersion(k + n, k + n - 2, "k") == {2}


def test_shift_substitute_diff():
    p = n ** 2 * k + x
    assert shift(p, "n", 2) == (n + 2) ** 2 * k + x
    assert evaluate(substitute(p, {"n": 3}), {"k": 2, "x": Fraction(1, 2)}) == Fraction(37, 2)
    assert diff(F(n) / F(n + 1), "n") == F(1) / F((n + 1) ** 2)


def test_sort_symbols_priority():
    assert sort_symbols(["x", "alpha", "k", "n", "beta"]) == ("n", "k", "x", "alpha", "beta")


def test_normalize_vector_primitive():
    v = normalize_vector([F(n) / 2, F(-n * (n + 1)) / 3])
    assert [str(e.as_expr()) for e in v] == ["3", "-2*n - 2"]
    assert primitive(R(Fraction(-2, 3)) * (n + 1)) == n + 1


# --------------------------------------------------------------------------
# properties

@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys(), polys(), st.tuples(small, small, small))
def test_ratfunc_arithmetic_agrees_with_evaluation(a, b, c, d, point):
    vals = dict(zip(("n", "k", "x"), (Fraction(v, 3) + Fraction(1, 7) for v in point)))
    if not b or not d or evaluate(b, vals) == 0 or evaluate(d, vals) == 0:
        return
    f, g = F(a) / F(b), F(c) / F(d)
    fv, gv = evaluate(f, vals), evaluate(g, vals)
    assert evaluate(f + g, vals) == fv + gv
    assert evaluate(f - g, vals) == fv - gv
    assert evaluate(f * g, vals) == fv * gv
    if gv:
        assert evaluate(f / g, vals) == fv / gv


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_gcd_divides_and_scales(a, b, c):
    if not a or not b or not c:
        return
    g = poly_gcd(a, b)
    assert a.rem(g) == 0 and b.rem(g) == 0
    lhs = poly_gcd(a * c, b * c)
    rhs = g * c
    # equal up to a nonzero rational unit
    assert primitive(lhs) == primitive(rhs)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=4))
def test_nullspace_integer_matrices(rows):
    basis = nullspace(rows)
    for v in basis:
        assert all(e == 0 for e in mat_vec(rows, v))
    r = rank(rows)
    assert len(basis) == 4 - r
    assert rank(rows, column_order=[3, 2, 1, 0]) == r


@settings(max_examples=25, deadline=None)
@given(st.lists(st.lists(st.tuples(small, small), min_size=3, max_size=3), min_size=1, max_size=3))
def test_nullspace_over_rational_functions(raw):
    rows = [[a + b * n for a, b in row] for row in raw]
    basis = nullspace(rows)
    for v in basis:
        assert all(not e for e in mat_vec(rows, v))
    ech, pivots, _ = echelon(rows, column_order=[2, 1, 0])
    assert len(basis) == 3 - len(pivots)


@settings(max_examples=60, deadline=None)
@given(linear_products(), linear_products())
def test_dispersion_matches_brute_force(pa, pb):
    a, _ = pa
    b, _ = pb
    brute = {j for j in range(0, 25) if poly_gcd(a, shift(b, "k", j)).degree() > 0}
    assert dispersion(a, b, "k") == brute


@settings(max_examples=60, deadline=None)
@given(linear_products("n"), st.integers(1, 3))
def test_integer_roots_match_construction(pc, scale):
    p, cs = pc
    m = p.ring.gens[0]
    assert integer_roots(p * (scale * m + 1 if scale > 1 else 1)) == {-c for c in cs}
    assert set(rational_roots(p)) == {Fraction(-c) for c in cs}


def test_to_frac_lifts_between_rings():
    p = poly_ring(("n",)).gens[0] + 1
    f = to_frac(p, ("n", "k", "x"))
    assert f.field == F
    assert f * F(x) == F((n + 1) * x)
