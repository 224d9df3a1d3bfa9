"""Standard orthogonal-polynomial data: Legendre and Jacobi systems.

Jacobi data are the classical three-term recurrence and derivative rule
(Abramowitz-Stegun 22.7.1 and 22.8.1), entered verbatim; they are inputs,
not derived here.
"""
from __future__ import annotations

from .exact import frac_field, gen, poly_ring
from .ode import AnnihilatorODE
from .rec import AnnihilatorRec
from .structrel import DerivativeRule, HolonomicSystem


def legendre_system() -> HolonomicSystem:
    R = poly_ring(("n", "x"))
    n, x = R.gens
    F = frac_field(("n", "x"))
    rec = AnnihilatorRec("n", [n + 1, -(2 * n + 3) * x, n + 2])
    ode = AnnihilatorODE("x", [-n * (n + 1), 2 * x, x ** 2 - 1])
    # (x^2-1) P_n' = (n+1) (P_{n+1} - x P_n)
    rule = DerivativeRule((-F(n + 1) * F(x) / F(x ** 2 - 1), F(n + 1) / F(x ** 2 - 1)))
    return HolonomicSystem(rec, "x", ode, rule, {(0, 0): R.one, (1, 0): x})


def jacobi_system(alpha: str = "alpha", beta: str = "beta") -> HolonomicSystem:
    names = ("n", "x", alpha, beta)
    R = poly_ring(names)
    F = frac_field(names)
    n, x, a, b = (gen(R, v) for v in names)
    s = a + b
    # 2(n+1)(n+s+1)(2n+s) P_{n+1} = (2n+s+1)[(2n+s+2)(2n+s) x + a^2-b^2] P_n
    #                               - 2(n+a)(n+b)(2n+s+2) P_{n-1}, taken at n+1
    m = n + 1
    rec = AnnihilatorRec("n", [
        2 * (m + a) * (m + b) * (2 * m + s + 2),
        -(2 * m + s + 1) * ((2 * m + s + 2) * (2 * m + s) * x + a ** 2 - b ** 2),
        2 * (m + 1) * (m + s + 1) * (2 * m + s),
    ])
    # (2n+s)(1-x^2) P_n' = n[a-b-(2n+s)x] P_n + 2(n+a)(n+b) P_{n-1}
    den = F((2 * n + s) * (1 - x ** 2))
    rule = DerivativeRule((F(2 * (n + a) * (n + b)) / den, F(n * (a - b - (2 * n + s) * x)) / den), offset=-1)
    P1 = ((s + 2) * x + a - b) * R(1) / 2
    return HolonomicSystem(rec, "x", None, rule, {(0, 0): R.one, (1, 0): P1})
