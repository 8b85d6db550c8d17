"""The stretched operator D_t^(alpha,gamma) on power series, and solvers for
the first- and second-order relaxation equations.

The operator is t^{-gamma} times the Caputo derivative of order alpha; it maps
t^beta to [Gamma(beta+1)/Gamma(beta-alpha+1)] t^{beta-(alpha+gamma)} and
annihilates constants.  Solutions are generalized power series in
t^{(alpha+gamma)n}; the first-order solution is the Kilbas-Saigo function and
the second-order solution is a mixture of two of them (or, in the confluent
root case, of one KS function and the derivative series).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammaln, gammasgn

from .fibpoly import bivariate_fib
from .kilbas_saigo import KSParams, ks_derivative, ks_eval

__all__ = [
    "StretchedModel",
    "SeriesSolution",
    "SecondOrderSpec",
    "bracket",
    "apply_operator_to_series",
    "solve_first_order",
    "solve_second_order",
    "second_order_recurrence_coeffs",
    "series_residual",
]


@dataclass(frozen=True)
class StretchedModel:
    """Operator order alpha, stretching exponent gamma, rate lam."""

    alpha: float
    gamma: float
    lam: float = 1.0

    def __post_init__(self):
        # alpha = 1 admitted as the degenerate (classical Poisson) boundary
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must lie in (0, 1]")
        if self.alpha + self.gamma <= 0.0:
            raise ValueError("alpha + gamma must be positive")
        if self.lam <= 0.0:
            raise ValueError("lam must be positive")

    @property
    def rho(self) -> float:
        return self.alpha + self.gamma

    @property
    def cm_regime(self) -> bool:
        """True when alpha + gamma <= 1 (completely monotone survival)."""
        return self.rho <= 1.0 + 1e-14

    @property
    def ks_params(self) -> KSParams:
        return KSParams.stretched(self.alpha, self.gamma)


def bracket(n: float, alpha: float, beta: float) -> float:
    """[n]^beta_alpha = Gamma(beta n + 1) / Gamma(beta n - alpha + 1)."""
    p = beta * n + 1.0
    q = beta * n - alpha + 1.0
    return gammasgn(p) * gammasgn(q) * math.exp(gammaln(p) - gammaln(q))


def _bracket_row(alpha: float, beta: float, n_max: int) -> np.ndarray:
    n = np.arange(1, n_max + 1, dtype=float)
    return gammasgn(beta * n + 1) * gammasgn(beta * n - alpha + 1) * np.exp(
        gammaln(beta * n + 1.0) - gammaln(beta * n - alpha + 1.0)
    )


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated series sum_n f_n t^{(alpha+gamma) n} with a validity bound."""

    model: StretchedModel
    coeffs: np.ndarray
    closed_form: object = None          # optional callable t -> value
    tail_tol: float = 1e-9

    @property
    def exponent_step(self) -> float:
        return self.model.rho

    @cached_property
    def t_max(self) -> float:
        """Largest t where the empirical series tail certifies tail_tol."""
        lo, hi = 0.0, 1.0
        while self._tail_at(hi) < self.tail_tol and hi < 1e8:
            lo, hi = hi, hi * 2.0
        if hi >= 1e8:
            return hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self._tail_at(mid) < self.tail_tol:
                lo = mid
            else:
                hi = mid
        return lo

    def _tail_at(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        n = len(self.coeffs) - 1
        if n < 2:
            return math.inf
        x = self.model.rho * math.log(t)
        # envelope slope from the last few coefficients; individual entries
        # can dip to ~0 at oscillation sign changes, so fit rather than
        # taking the final ratio
        k = min(8, n)
        la = np.log(np.abs(self.coeffs[-k - 1:]) + 1e-320)
        keep = la > la.max() - 200.0
        idx = np.arange(la.size, dtype=float)
        if keep.sum() < 2:
            return math.inf
        slope = np.polyfit(idx[keep], la[keep], 1)[0]
        last = float(la[keep].max()) + n * x
        ratio = math.exp(min(slope + x, 700.0))
        if ratio >= 0.5 or last > 700.0:
            return math.inf
        return 10.0 * math.exp(last) * ratio / (1.0 - ratio)

    def __call__(self, t):
        """Evaluate on a scalar or grid; delegates to the closed form past t_max."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(ts < 0):
            raise ValueError("t must be nonnegative")
        out = np.empty(ts.shape)
        inside = ts <= self.t_max
        if np.any(inside):
            n = np.arange(len(self.coeffs))
            tin = ts[inside]
            with np.errstate(divide="ignore", under="ignore"):
                logt = np.where(tin > 0, np.log(tin), 0.0)
                powers = np.exp(np.outer(logt * self.model.rho, n))
            powers[tin == 0.0] = 0.0
            powers[tin == 0.0, 0] = 1.0
            out[inside] = powers @ self.coeffs
        if np.any(~inside):
            if self.closed_form is None:
                raise ValueError(
                    f"t beyond series validity t_max={self.t_max:.3g} "
                    "and no closed form available"
                )
            out[~inside] = [self.closed_form(x) for x in ts[~inside]]
        return out if np.ndim(t) else float(out[0])


def apply_operator_to_series(sol: SeriesSolution) -> SeriesSolution:
    """D^(alpha,gamma) acting termwise: g_n = f_{n+1} [n+1]^{rho}_alpha."""
    m = sol.model
    f = sol.coeffs
    if len(f) <= 1:
        return SeriesSolution(model=m, coeffs=np.zeros(1), tail_tol=sol.tail_tol)
    row = _bracket_row(m.alpha, m.rho, len(f) - 1)
    return SeriesSolution(model=m, coeffs=f[1:] * row, tail_tol=sol.tail_tol)


def solve_first_order(
    model: StretchedModel, kappa: float, f0: float = 1.0, n_max: int = 128
) -> SeriesSolution:
    """Solution of D^(a,g) f + kappa f = 0, f(0) = f0: a KS function."""
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    row = _bracket_row(model.alpha, model.rho, n_max)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(row))])
    n = np.arange(n_max + 1)
    with np.errstate(under="ignore"):
        coeffs = f0 * (-kappa) ** n * np.exp(-log_fact)
    params = model.ks_params

    def closed_form(t, _p=params, _k=kappa, _f0=f0, _rho=model.rho):
        return _f0 * ks_eval(_p, -_k * t ** _rho)

    return SeriesSolution(model=model, coeffs=coeffs, closed_form=closed_form)


@dataclass(frozen=True)
class SecondOrderSpec:
    """(D)^2 f + a D f + b f = 0 with f(0) = f0 and (D f)(0) = df0."""

    alpha: float
    gamma: float
    a: float
    b: float
    f0: float = 1.0
    df0: float = 0.0

    def __post_init__(self):
        StretchedModel(self.alpha, self.gamma, 1.0)  # validate orders
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError("a and b must be positive")
        gap = abs(self.b - self.a ** 2 / 4.0)
        if 0.0 < gap < 1e-10 * self.a ** 2:
            warnings.warn(
                "near-confluent roots: mixing constants are ill-conditioned",
                RuntimeWarning,
            )

    @property
    def model(self) -> StretchedModel:
        return StretchedModel(self.alpha, self.gamma, 1.0)

    @property
    def case(self) -> str:
        disc = self.a ** 2 / 4.0 - self.b
        if abs(disc) <= 1e-12 * max(self.a ** 2, 1.0):
            return "confluent"
        return "distinct-real" if disc > 0 else "complex-pair"

    @property
    def omega(self) -> complex:
        w = complex(self.a ** 2 / 4.0 - self.b) ** 0.5
        return w if self.case != "distinct-real" else complex(w.real, 0.0)

    @property
    def eta1(self) -> complex:
        e = self.a / 2.0 - self.omega
        return e.real if self.case == "distinct-real" else e

    @property
    def eta2(self) -> complex:
        e = self.a / 2.0 + self.omega
        return e.real if self.case == "distinct-real" else e

    @property
    def mixing(self):
        """(K1, K2) for distinct roots, (K'1, K'2) in the confluent case."""
        if self.case == "confluent":
            return self.f0, self.df0 + self.a / 2.0 * self.f0
        k1 = (self.eta2 * self.f0 + self.df0) / (self.eta2 - self.eta1)
        return k1, self.f0 - k1


def second_order_recurrence_coeffs(spec: SecondOrderSpec, n_max: int) -> np.ndarray:
    """Coefficients via the bivariate-Fibonacci closed recurrence."""
    m = spec.model
    row = _bracket_row(m.alpha, m.rho, n_max)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(row))])
    b1 = row[0]
    f1 = spec.df0 / b1
    out = np.empty(n_max + 1)
    out[0] = spec.f0
    for n in range(1, n_max + 1):
        u_n = bivariate_fib(n, -spec.a, -spec.b)
        u_nm1 = bivariate_fib(n - 1, -spec.a, -spec.b)
        out[n] = math.exp(-log_fact[n]) * (
            u_n * b1 * f1 + (-spec.b) * u_nm1 * spec.f0
        )
    return out


def solve_second_order(spec: SecondOrderSpec, n_max: int = 128) -> SeriesSolution:
    """Series solution by closed-form root mixing (all three root cases)."""
    m = spec.model
    row = _bracket_row(m.alpha, m.rho, n_max)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(row))])
    n = np.arange(n_max + 1)
    inv_fact = np.exp(-log_fact)
    params = m.ks_params

    if spec.case == "confluent":
        k1, k2 = spec.mixing         # K'1 = f0, K'2 = g0
        h = -spec.a / 2.0
        with np.errstate(under="ignore"):
            coeffs = inv_fact * (k1 * h ** n)
            coeffs[1:] += inv_fact[1:] * k2 * h ** (n[1:] - 1) * n[1:]

        def closed_form(t, _p=params, _s=spec, _rho=m.rho):
            k1c, k2c = _s.mixing
            x = -(_s.a / 2.0) * t ** _rho
            return k1c * ks_eval(_p, x) + k2c * t ** _rho * ks_derivative(_p, 1, x)

    else:
        k1, k2 = spec.mixing
        e1, e2 = spec.eta1, spec.eta2
        with np.errstate(under="ignore"):
            raw = k1 * (-e1) ** n.astype(complex) + k2 * (-e2) ** n.astype(complex)
        coeffs = inv_fact * raw.real

        def closed_form(t, _p=params, _s=spec, _rho=m.rho):
            k1c, k2c = _s.mixing
            v = k1c * ks_eval(_p, -_s.eta1 * t ** _rho) \
                + k2c * ks_eval(_p, -_s.eta2 * t ** _rho)
            return complex(v).real

        if spec.case == "complex-pair":
            # survival positivity is not guaranteed here; computed but
            # excluded from probabilistic use downstream
            pass

    return SeriesSolution(model=m, coeffs=coeffs, closed_form=closed_form)


def series_residual(sol: SeriesSolution, equation: dict, t_grid) -> float:
    """Max |LHS| of the governing equation over t_grid (truncation residual).

    equation: {"kind": "first-order", "kappa": k}
           or {"kind": "second-order", "a": a, "b": b}.
    """
    ts = np.asarray(t_grid, dtype=float)
    if np.any(ts > sol.t_max):
        raise ValueError("t_grid exceeds the series validity interval")
    m = sol.model
    d1 = apply_operator_to_series(sol)
    if equation["kind"] == "first-order":
        k = len(d1.coeffs)
        res = d1.coeffs + equation["kappa"] * sol.coeffs[:k]
        rs = SeriesSolution(model=m, coeffs=res, tail_tol=math.inf)
    elif equation["kind"] == "second-order":
        d2 = apply_operator_to_series(d1)
        k = len(d2.coeffs)
        res = d2.coeffs + equation["a"] * d1.coeffs[:k] \
            + equation["b"] * sol.coeffs[:k]
        rs = SeriesSolution(model=m, coeffs=res, tail_tol=math.inf)
    else:
        raise ValueError("unknown equation kind")
    n = np.arange(len(rs.coeffs))
    vals = []
    for t in ts:
        if t == 0.0:
            vals.append(abs(rs.coeffs[0]))
        else:
            with np.errstate(under="ignore"):
                vals.append(abs(float(np.sum(rs.coeffs * t ** (m.rho * n)))))
    return max(vals)
