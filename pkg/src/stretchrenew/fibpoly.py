"""Fibonacci polynomials F_n(x) and bivariate Fibonacci polynomials u_n(x, y).

F_0 = 0, F_1 = 1, F_{n+2} = x F_{n+1} + F_n;
u_0 = 0, u_1 = 1, u_{n+2} = x u_{n+1} + y u_n.

The recurrences are the computation path.  The Binet-style closed forms
(in terms of mu, nu = (x +- sqrt(x^2 + 4))/2) and the reduction
u_n(x, y) = y^{(n-1)/2} F_n(x / sqrt(y)) cancel subtractively for large n and
serve only as test oracles.
"""

from __future__ import annotations

import cmath

__all__ = [
    "fib_poly",
    "bivariate_fib",
    "fib_poly_closed",
    "bivariate_fib_reduction",
]


def fib_poly(n: int, x: float) -> float:
    """F_n(x) by the recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    prev, cur = 0.0, 1.0
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, x * cur + prev
    return cur


def bivariate_fib(n: int, x: float, y: float) -> float:
    """u_n(x, y) by the recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    prev, cur = 0.0, 1.0
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, x * cur + y * prev
    return cur


def fib_poly_closed(n: int, x: float) -> float:
    """Binet form (mu^n - nu^n)/(mu - nu); test oracle only."""
    d = cmath.sqrt(x * x + 4.0)
    mu = (x + d) / 2.0
    nu = (x - d) / 2.0
    if abs(d) < 1e-12:
        return float(n) * x ** max(n - 1, 0) / 2.0 ** max(n - 1, 0)
    return ((mu ** n - nu ** n) / d).real


def bivariate_fib_reduction(n: int, x: float, y: float) -> float:
    """u_n(x, y) = y^{(n-1)/2} F_n(x / sqrt(y)) for y > 0; test oracle only."""
    if y <= 0:
        raise ValueError("reduction identity requires y > 0")
    import math

    return y ** ((n - 1) / 2.0) * fib_poly(n, x / math.sqrt(y))
