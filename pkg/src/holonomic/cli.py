"""Command-line interface ``holo``.

Expressions are given as arguments; an argument ``@path`` reads the file
(``@-`` reads stdin).  Exit codes: 0 success, 1 negative result, 2 parse or
validation error, 3 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .exact import sort_symbols
from .hypersum import (
    DEFAULT_MAX_ORDER,
    IdentityProof,
    NoSolution,
    OrderExceeded,
    gosper,
    prove_identity,
    solve_two_term,
    zeilberger,
)
from .hyperterm import mixed_rec, term_ratio
from .ode import InitialValuesODE, ode_product, ode_substitute, ode_sum, ode_to_rec, rec_to_ode, taylor_coeffs
from .ore import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    TermOrder,
    eliminate,
    left_groebner,
    left_reduce,
    sum_recurrence_from_operators,
)
from .parser import (
    LoweringError,
    ParseError,
    SystemFile,
    linear_in_calls,
    lower_rational,
    parse,
    parse_ode,
    parse_order,
    parse_ore,
    parse_rec,
    parse_system,
    parse_term,
)
from .rec import InsufficientInitialValues, rec_product, rec_sum, unroll
from .render import FORMATS, render
from .structrel import (
    DerivativeRule,
    HolonomicSystem,
    ShapeTerm,
    VerificationReport,
    find_structure_relation,
    verify_relation_numeric,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    """Invalid option values (exit code 2)."""


def read_arg(arg: str) -> str:
    if arg == "@-":
        return sys.stdin.read()
    if arg.startswith("@"):
        with open(arg[1:], encoding="utf-8") as fh:
            return fh.read()
    return arg


def budget_from_env(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("HOLO_BUDGET")
    if env is None:
        return DEFAULT_BUDGET
    try:
        value = int(env)
    except ValueError:
        raise UsageError(f"HOLO_BUDGET must be an integer, got {env!r}") from None
    if value <= 0:
        raise UsageError("HOLO_BUDGET must be positive")
    return value


def parse_values(spec: str | None) -> dict:
    """``alpha=1/2,beta=1/3`` -> {name: Fraction}."""
    out = {}
    for piece in (spec or "").split(","):
        if not piece.strip():
            continue
        name, sep, value = piece.partition("=")
        if not sep:
            raise UsageError(f"expected name=value, got {piece!r}")
        try:
            out[name.strip()] = Fraction(value.strip())
        except ValueError:
            raise UsageError(f"not a rational number: {value.strip()!r}") from None
    return out


def parse_numbers(spec: str | None) -> list[Fraction]:
    try:
        return [Fraction(s.strip()) for s in (spec or "").split(",") if s.strip()]
    except ValueError as err:
        raise UsageError(f"bad number list {spec!r}: {err}") from None


def single_term(text: str):
    ts = parse_term(read_arg(text))
    if len(ts.terms) != 1:
        raise UsageError("expected a single hypergeometric term, not a sum")
    return ts.terms[0]


def order_from(args, fallback: TermOrder | None) -> TermOrder | None:
    if args.order:
        return parse_order(args.kind, args.order.replace(";", "|"))
    return fallback


# --------------------------------------------------------------------------
# commands

def cmd_ode(args):
    A = parse_ode(read_arg(args.ops[0]), args.var)
    if args.action in ("sum", "product", "subs"):
        if len(args.ops) != 2:
            raise UsageError(f"ode {args.action} needs two arguments")
        if args.action == "subs":
            names = sort_symbols({args.var})
            r = lower_rational(parse(read_arg(args.ops[1]), equation=False), names)
            return ode_substitute(A, r)
        B = parse_ode(read_arg(args.ops[1]), args.var)
        return ode_sum(A, B) if args.action == "sum" else ode_product(A, B)
    if args.action == "torec":
        return ode_to_rec(A, args.index)
    # coeffs
    iv = InitialValuesODE.from_taylor(parse_numbers(args.initial))
    return taylor_coeffs(A, iv, args.count)


def cmd_rec(args):
    R = parse_rec(read_arg(args.ops[0]), args.var)
    if args.action in ("sum", "product"):
        if len(args.ops) != 2:
            raise UsageError(f"rec {args.action} needs two arguments")
        S = parse_rec(read_arg(args.ops[1]), args.var)
        return rec_sum(R, S) if args.action == "sum" else rec_product(R, S)
    if args.action == "tode":
        return rec_to_ode(R, parse_numbers(args.initial), args.x)
    values = parse_values(args.set)
    if args.action == "solve":
        return solve_two_term(R, parse_numbers(args.initial), values)
    return unroll(R, parse_numbers(args.initial), args.count, values)


def cmd_term(args):
    t = parse_term(read_arg(args.term))
    variables = [v.strip() for v in args.vars.split(",") if v.strip()]
    if args.action == "ratios":
        if len(t.terms) != 1:
            raise UsageError("ratios need a single hypergeometric term")
        return [term_ratio(t.terms[0], v) for v in variables]
    return [mixed_rec(t, v) for v in variables]


def cmd_gosper(args):
    return gosper(single_term(args.term), args.var)


def cmd_zeilberger(args):
    try:
        return zeilberger(single_term(args.term), args.n, args.k, args.max_order)
    except OrderExceeded as err:
        return NoSolution(str(err))


def cmd_prove(args):
    return prove_identity(single_term(args.lhs), single_term(args.rhs), args.n, args.k, args.max_order)


def load_system(path_arg: str) -> SystemFile:
    return parse_system(read_arg(path_arg))


def cmd_ore(args):
    sf = load_system(args.system)
    budget = budget_from_env(args.budget)
    if not sf.operators:
        raise UsageError("the system file has no operators")
    if args.action == "sumrec":
        return sum_recurrence_from_operators(sf.operators, args.n, args.k, budget)
    order = order_from(args, sf.order) or TermOrder.lex()
    if args.action == "groebner":
        G = left_groebner(sf.operators, order, budget)
        return SystemFile(sf.algebra, order, G)
    if args.action == "eliminate":
        drop = [v.strip() for v in (args.drop or "").split(",") if v.strip()]
        if not drop:
            raise UsageError("eliminate needs --drop")
        if not args.order:
            order = TermOrder.lex(*drop, *(v for v in order.priority if v not in drop))
        return SystemFile(sf.algebra, order, eliminate(sf.operators, drop, order, budget))
    # reduce
    if not args.poly:
        raise UsageError("reduce needs --poly")
    G = left_groebner(sf.operators, order, budget)
    return left_reduce(parse_ore(read_arg(args.poly), sf.algebra), G, order)


FAMILIES = ("legendre", "jacobi")


def structrel_system(args) -> HolonomicSystem:
    from .families import jacobi_system, legendre_system
    if args.family == "legendre":
        return legendre_system()
    if args.family == "jacobi":
        return jacobi_system()
    if not (args.rec and args.rule):
        raise UsageError("give --family or both --rec and --rule")
    rec = parse_rec(read_arg(args.rec), "n")
    lhs_rhs = parse(read_arg(args.rule))
    if not hasattr(lhs_rhs, "lhs") or linear_in_calls(lhs_rhs.lhs) != {(1, 0): 1}:
        raise UsageError("rule must read F'(n) = sum of c*F(n+s)")
    combo = linear_in_calls(lhs_rhs.rhs)
    if any(j for j, _ in combo):
        raise UsageError("the rule's right-hand side may only contain F(n+s)")
    lo, hi = min(s for _, s in combo), max(s for _, s in combo)
    rule = DerivativeRule(tuple(combo.get((0, s), 0) for s in range(lo, hi + 1)), lo)
    initials = {}
    for i, piece in enumerate(p for p in read_arg(args.initial or "").split(";") if p.strip()):
        initials[(i, 0)] = lower_rational(parse(piece, equation=False), ("x",))
    return HolonomicSystem(rec, "x", None, rule, initials)


def shape_from(text: str) -> list[ShapeTerm]:
    e = parse(text)
    if not hasattr(e, "lhs"):
        raise UsageError("shape must read FIXED = TERM + TERM + ...")
    fixed = linear_in_calls(e.lhs)
    if len(fixed) != 1:
        raise UsageError("the left side of the shape must be a single term")
    (fj, fs), fm = next(iter(fixed.items()))
    terms = [ShapeTerm(fj, fs, fm, True)]
    terms += [ShapeTerm(j, s, m, False) for (j, s), m in linear_in_calls(e.rhs).items()]
    return terms


def cmd_structrel(args):
    system = structrel_system(args)
    rel = find_structure_relation(system, shape_from(read_arg(args.shape)))
    if not rel or args.verify is None:
        return rel
    report = verify_relation_numeric(rel, system, args.verify, values=parse_values(args.set))
    return {"relation": rel, "verification": report}


def negative(result) -> bool:
    if isinstance(result, NoSolution):
        return True
    if isinstance(result, IdentityProof):
        return not result.proved
    if isinstance(result, dict):
        return any(isinstance(v, VerificationReport) and not v.ok for v in result.values())
    return False


# --------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holo", description="Exact holonomic and hypergeometric computations.")
    ap.add_argument("--format", choices=FORMATS, default="text", help="output format (default: text)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ode", help="differential operators in D")
    p.add_argument("action", choices=("sum", "product", "subs", "torec", "coeffs"))
    p.add_argument("ops", nargs="+", help="operators such as '(x^2-1)*D^2 + x*D'; subs takes a rational function")
    p.add_argument("--var", default="x")
    p.add_argument("--index", default="n", help="index variable for torec")
    p.add_argument("--initial", help="Taylor coefficients a_0,a_1,... for coeffs")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(run=cmd_ode)

    p = sub.add_parser("rec", help="recurrence operators in the shift N")
    p.add_argument("action", choices=("sum", "product", "tode", "unroll", "solve"))
    p.add_argument("ops", nargs="+", help="operators such as '(n+1)*N - 2*(2*n+1)'")
    p.add_argument("--var", default="n")
    p.add_argument("--x", default="x", help="series variable for tode")
    p.add_argument("--initial", help="initial values a_0,a_1,...")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--set", help="parameter values, e.g. x=1/2")
    p.set_defaults(run=cmd_rec)

    p = sub.add_parser("term", help="hypergeometric terms")
    p.add_argument("action", choices=("ratios", "rec"))
    p.add_argument("term")
    p.add_argument("--vars", default="n,k", help="comma list of variables")
    p.set_defaults(run=cmd_term)

    p = sub.add_parser("gosper", help="indefinite hypergeometric summation")
    p.add_argument("term")
    p.add_argument("--var", default="k")
    p.set_defaults(run=cmd_gosper)

    p = sub.add_parser("zeilberger", help="recurrence for a definite sum over k")
    p.add_argument("term")
    p.add_argument("--n", default="n")
    p.add_argument("--k", default="k")
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    p.set_defaults(run=cmd_zeilberger)

    p = sub.add_parser("prove", help="prove sum_k lhs = sum_k rhs")
    p.add_argument("lhs")
    p.add_argument("rhs")
    p.add_argument("--n", default="n")
    p.add_argument("--k", default="k")
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    p.set_defaults(run=cmd_prove)

    p = sub.add_parser("ore", help="left ideals in Ore algebras (system files)")
    p.add_argument("action", choices=("groebner", "eliminate", "reduce", "sumrec"))
    p.add_argument("system", help="system file (@path) or its text")
    p.add_argument("--order", help="comma list, e.g. k,n,K,N (';' separates blocks)")
    p.add_argument("--kind", choices=("lex", "block"), default="lex")
    p.add_argument("--drop", help="variables to eliminate")
    p.add_argument("--poly", help="operator to reduce")
    p.add_argument("--n", default="n")
    p.add_argument("--k", default="k")
    p.add_argument("--budget", type=int, help="reduction budget (default: HOLO_BUDGET or 100000)")
    p.set_defaults(run=cmd_ore)

    p = sub.add_parser("structrel", help="structure relations of polynomial families")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--rec", help="recurrence in N with coefficients in n, x")
    p.add_argument("--rule", help="derivative rule, e.g. \"F'(n) = a*F(n) + b*F(n+1)\"")
    p.add_argument("--initial", help="F(0); F(1); ... as polynomials in x")
    p.add_argument("--shape", required=True, help="e.g. \"F(n) = F'(n-1) + F'(n) + F'(n+1)\"")
    p.add_argument("--verify", type=int, metavar="N_MAX", help="verify exactly for n <= N_MAX")
    p.add_argument("--set", help="parameter values for verification, e.g. alpha=1/2,beta=1/3")
    p.set_defaults(run=cmd_structrel)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        result = args.run(args)
        out = render(result, args.format)
    except BudgetExceeded as err:
        print(f"holo: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except (ParseError, LoweringError, UsageError, InsufficientInitialValues, OSError) as err:
        print(f"holo: {err}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as err:
        print(f"holo: {err}", file=sys.stderr)
        return EXIT_INPUT
    print(out)
    return EXIT_NEGATIVE if negative(result) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
