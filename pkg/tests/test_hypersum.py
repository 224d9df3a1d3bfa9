from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomic.exact import evaluate
from holonomic.hypersum import (
    ClosedForm,
    GosperCertificate,
    NoSolution,
    OrderExceeded,
    SymbolicProduct,
    gosper,
    initial_indices,
    prove_identity,
    solve_two_term,
    sum_oracle,
    zeilberger,
)
from holonomic.hyperterm import UndefinedTerm
from holonomic.parser import parse_rec, parse_term
from holonomic.rec import unroll
from corpus import FRANEL, GOSPER_CORPUS
from oracles import binomial_power_sum, brute_antidifference, franel, strehl_sum


def term(text):
    return parse_term(text).single()


def value(t, point):
    try:
        return t.evaluate(point)
    except (UndefinedTerm, ZeroDivisionError):
        return None


def assert_telescopes(cert: GosperCertificate, values=None, upto=16):
    """G(k+1) - G(k) = t(k) for k = 0..upto-1 where R and t are defined."""
    t = cert.term
    checked = 0
    for kv in range(0, upto):
        point = {**(values or {}), cert.var: kv}
        nxt = {**point, cert.var: kv + 1}
        try:
            r0, r1 = evaluate(cert.rational, point), evaluate(cert.rational, nxt)
        except ZeroDivisionError:
            continue
        t0, t1 = value(t, point), value(t, nxt)
        if t0 is None or t1 is None:
            continue
        assert r1 * t1 - r0 * t0 == t0
        checked += 1
    assert checked >= upto // 2


# --------------------------------------------------------------------------
# Gosper

def test_gosper_examples():
    cert = gosper(term("k*k!"))
    assert str(cert.rational.as_expr()) == "1/k"
    assert cert.antidifference() == term("k!")
    assert_telescopes(cert)
    cert = gosper(term("k"))
    assert all(evaluate(cert.rational, {"k": kv}) == Fraction(kv - 1, 2) for kv in range(6))
    assert_telescopes(cert)
    result = gosper(term("binomial(n,k)"))
    assert isinstance(result, NoSolution) and not result


@pytest.mark.parametrize("n_value", [3, 4, 5, 6])
def test_binomial_partial_sums_are_not_term_multiples(n_value):
    # for fixed n the k-ratio of C(n,k) is (n-k)/(k+1)
    assert brute_antidifference(f"{n_value} - k", "k + 1") is None


@pytest.mark.parametrize("text", sorted(GOSPER_CORPUS))
def test_gosper_corpus_sound_and_complete(text):
    result = gosper(term(text))
    assert bool(result) == GOSPER_CORPUS[text]
    if result:
        assert_telescopes(result)


def test_gosper_with_parameter():
    cert = gosper(term("binomial(n,k)*(n-2*k)"))
    assert cert
    for nv in range(1, 6):
        assert_telescopes(cert, {"n": nv}, upto=nv + 3)


RATIONAL = st.sampled_from(["1", "k", "k+1", "2*k+1", "k^2", "1/(k+1)", "1/(k+2)", "k+3"])
FACTOR = st.sampled_from(["1", "k!", "1/k!", "2^k", "(-1)^k", "3^k", "(2*k)!/k!^2", "1/(2*k+1)!", "4^k*k!^2/(2*k)!"])


@settings(max_examples=40, deadline=None)
@given(RATIONAL, FACTOR)
def test_gosper_soundness_on_random_terms(r, f):
    t = parse_term(f"({r}) * {f}").single()
    result = gosper(t)
    if result:
        assert_telescopes(result)


@settings(max_examples=6, deadline=None)
@given(RATIONAL, st.sampled_from(["1", "k!", "2^k", "(-1)^k", "1/k!"]))
def test_gosper_agrees_with_brute_force(r, f):
    t = parse_term(f"({r}) * {f}").single()
    ratio = t.ratio("k")
    brute = brute_antidifference(str(ratio.numer.as_expr()), str(ratio.denom.as_expr()))
    assert bool(gosper(t)) == (brute is not None)


# --------------------------------------------------------------------------
# Zeilberger

def assert_certificate(z, n_max=8):
    """sum_j sigma_j t(n+j,k) = G(n,k+1) - G(n,k) pointwise, G = R t."""
    t = z.term
    checked = 0
    for nv in range(0, n_max):
        for kv in range(-2, nv + 4):
            try:
                Rk = evaluate(z.certificate, {"n": nv, "k": kv})
                Rk1 = evaluate(z.certificate, {"n": nv, "k": kv + 1})
            except ZeroDivisionError:
                continue
            vals = [value(t, {"n": nv + j, "k": kv}) for j in range(z.order + 1)]
            g0, g1 = value(t, {"n": nv, "k": kv}), value(t, {"n": nv, "k": kv + 1})
            if None in vals or g0 is None or g1 is None:
                continue
            lhs = sum(evaluate(s, {"n": nv}) * v for s, v in zip(z.recurrence.coeffs, vals))
            assert lhs == Rk1 * g1 - Rk * g0
            checked += 1
    assert checked > 10


def test_zeilberger_central_binomial():
    z = zeilberger(term("binomial(n,k)^2"))
    assert z.recurrence == parse_rec("(n+1)*N - 2*(2*n+1)")
    assert z.order == 1
    assert_certificate(z)
    sums = [binomial_power_sum(i, 2) for i in range(22)]
    assert all(z.recurrence.residual(sums, i) == 0 for i in range(21))


def test_zeilberger_franel_and_strehl():
    za = zeilberger(term("binomial(n,k)^3"))
    zb = zeilberger(term("binomial(n,k)^2*binomial(2*k,n)"))
    assert za.recurrence == zb.recurrence == parse_rec(FRANEL)
    assert [franel(i) for i in range(5)] == [1, 2, 10, 56, 346]
    for z, f in ((za, franel), (zb, strehl_sum)):
        assert_certificate(z, 6)
        sums = [f(i) for i in range(32)]
        assert all(z.recurrence.residual(sums, i) == 0 for i in range(30))


def test_zeilberger_row_sums():
    z = zeilberger(term("binomial(n,k)"))
    assert z.recurrence == parse_rec("N - 2")
    assert_certificate(z)


def test_zeilberger_order_exceeded():
    with pytest.raises(OrderExceeded):
        zeilberger(term("binomial(n,k)^3"), max_order=1)


@pytest.mark.parametrize("text,oracle", [
    ("binomial(n,k)^2", lambda i: binomial_power_sum(i, 2)),
    ("binomial(n,k)*2^k", lambda i: 3 ** i),
    ("binomial(n,k)*binomial(n,n-k)", lambda i: comb(2 * i, i)),
    ("k*binomial(n,k)", lambda i: i * 2 ** (i - 1) if i else 0),
])
def test_zeilberger_telescoped_sums(text, oracle):
    z = zeilberger(term(text))
    assert_certificate(z, 6)
    sums = [Fraction(oracle(i)) for i in range(27)]
    assert all(z.recurrence.residual(sums, i) == 0 for i in range(26 - z.order))


# --------------------------------------------------------------------------
# two-term recurrences

def test_solve_two_term_arcsin_square():
    R = parse_rec("n*(1+n)*(2+n)*N^2 - n^3")
    cf = solve_two_term(R, [0, 0, 1, 0])
    assert isinstance(cf, ClosedForm) and cf.modulus == 2
    even = cf.classes[0]
    assert even.start == 2
    for m in range(15):
        expected = Fraction(4 ** m * factorial(m) ** 2, (m + 1) * factorial(2 * m + 1))
        assert cf(2 * m + 2) == expected
        assert even.term.evaluate({"n": m}) == expected
        assert cf(2 * m + 1) == 0
    assert cf.unroll(40) == unroll(R, [0, 0, 1, 0], 40)


def test_solve_two_term_central_binomial():
    cf = solve_two_term(parse_rec("(1+n)*N - 2*(1+2*n)"), [1])
    assert cf.classes[0].term == term("(2*n)!/n!^2")
    assert cf.unroll(20) == [comb(2 * i, i) for i in range(20)]


def test_solve_two_term_constant_and_errors():
    assert solve_two_term(parse_rec("N - 1"), [5]).unroll(4) == [5, 5, 5, 5]
    with pytest.raises(ValueError):
        solve_two_term(parse_rec("N^2 - N - 1"), [0, 1])


def test_solve_two_term_symbolic_fallback():
    # n^2 + 1 has no rational roots, so the product stays unevaluated
    R = parse_rec("N - (n^2+1)")
    cf = solve_two_term(R, [1])
    assert isinstance(cf.classes[0].term, SymbolicProduct)
    assert cf.unroll(8) == unroll(R, [1], 8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(-3, 3), st.integers(1, 3), st.integers(0, 3),
       st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_solve_two_term_matches_unroll(m, c, a, b, init):
    R = parse_rec(f"(n+{a})*N^{m} - ({c})*(n+{b})")
    if not R.coeffs[0]:
        return
    cf = solve_two_term(R, init[:m])
    assert cf.unroll(20 * m) == unroll(R, init[:m], 20 * m)


# --------------------------------------------------------------------------
# identity proofs and the sum oracle

def test_prove_franel_strehl():
    proof = prove_identity(term("binomial(n,k)^3"), term("binomial(n,k)^2*binomial(2*k,n)"))
    assert proof.proved
    assert proof.recurrence == parse_rec(FRANEL)
    assert proof.checked == ((0, 1), (1, 2))


def test_prove_row_sum_against_power():
    proof = prove_identity(term("binomial(n,k)"), term("binomial(n,0)*2^n"))
    assert proof.proved
    assert all(sum_oracle(term("binomial(n,k)"), i) == 2 ** i for i in range(11))


def test_prove_rejects_different_sums():
    proof = prove_identity(term("binomial(n,k)^2"), term("binomial(n,k)^3"))
    assert not proof.proved and proof.verdict == "inconclusive"
    assert sum_oracle(term("binomial(n,k)^2"), 2) == 6 and sum_oracle(term("binomial(n,k)^3"), 2) == 10


PERTURBED = [
    "2*binomial(n,k)^2*binomial(2*k,n)",
    "binomial(n,k)^2*binomial(2*k+1,n)",
    "binomial(n,k)^2*binomial(2*k,n-1)",
    "binomial(n,k)^2*binomial(2*k,n)*(-1)^k",
    "binomial(n,k)^3*(k+1)",
    "binomial(n+1,k)^3",
    "binomial(n,k)^2*binomial(2*n,k)",
]


@pytest.mark.parametrize("rhs", PERTURBED)
def test_prove_never_accepts_perturbed_inputs(rhs):
    lhs = term("binomial(n,k)^3")
    proof = prove_identity(lhs, term(rhs))
    differs = any(sum_oracle(term(rhs), i) != franel(i) for i in range(31))
    assert differs
    assert not proof.proved


def test_initial_indices_cover_singular_points():
    assert initial_indices(parse_rec(FRANEL)) == [0, 1]
    assert initial_indices(parse_rec("(n-3)*N - n")) == [0, 1, 2, 3, 4]


def test_sum_oracle_examples():
    assert sum_oracle(term("binomial(n,k)^2"), 4) == 70
    assert sum_oracle(term("binomial(n,k)^3"), 3) == 56
    assert sum_oracle(term("binomial(n,k)"), 0) == 1
    with pytest.raises(ValueError, match="unbounded support"):
        sum_oracle(term("2^k"), 3)
