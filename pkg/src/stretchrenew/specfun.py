"""Gamma-family scalar kernels and the double gamma function G(z; tau).

The double gamma function used here is the two-parameter Barnes-type entire
function normalized by G(1; tau) = 1, with zeros at z = -m*tau - n for
nonnegative integers m, n.  It satisfies

    G(z + 1; tau)   = Gamma(z / tau) * G(z; tau)
    G(z + tau; tau) = (2*pi)**((tau-1)/2) * tau**(1/2 - z) * Gamma(z) * G(z; tau)

Evaluation routes:

* moderate arguments with Re z > 0: adaptive-panel Gauss-Legendre quadrature
  of the log-integral representation on (0, 1), rewritten on (0, inf) through
  r = exp(-w) so both endpoint singularities become removable and the
  integrand decays exponentially;
* large |z|: asymptotic (Stirling-type) expansion;
* Re z <= 0: upward recursion through the first functional relation.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, gammasgn, loggamma

__all__ = [
    "PoleError",
    "QuadratureError",
    "log_gamma",
    "gamma_ratio",
    "double_gamma",
    "log_double_gamma",
    "STIRLING_THRESHOLD",
]

#: |z| above which the public double_gamma switches to the asymptotic series.
STIRLING_THRESHOLD = 20.0

_POLE_TOL = 1e-12


class PoleError(ValueError):
    """Argument too close to a pole of the gamma function."""


class QuadratureError(ArithmeticError):
    """Quadrature failed to reach the requested tolerance."""


def _check_pole(z) -> None:
    zc = complex(z)
    if zc.imag == 0.0 and zc.real <= 0.5:
        if abs(zc.real - round(zc.real)) < _POLE_TOL and round(zc.real) <= 0:
            raise PoleError(f"gamma pole at z = {z}")


def log_gamma(z):
    """Principal-branch log Gamma(z) for real or complex z."""
    _check_pole(z)
    if np.iscomplexobj(z) or isinstance(z, complex):
        return loggamma(z)
    return loggamma(float(z) + 0j).real if z < 0 else float(gammaln(z))


def gamma_ratio(p: float, q: float) -> float:
    """Gamma(p) / Gamma(q) for real p, q, evaluated in log space.

    Overflow-free for arguments up to ~1e4; the sign is recovered through
    the sign of each gamma factor.
    """
    _check_pole(p)
    _check_pole(q)
    sign = gammasgn(p) * gammasgn(q)
    return float(sign * np.exp(gammaln(p) - gammaln(q)))


# ---------------------------------------------------------------------------
# Double gamma: integral route
# ---------------------------------------------------------------------------
#
# With r = exp(-w) the (0,1) integrand of log G(z;tau) becomes
#   log G(z;tau) = -int_0^inf exp(-w) * B(w) / w dw
# where B collects three groups, each stable under expm1:
#   T1 = exp(-(tau-1)w) * expm1((tau-z)w) / (E1 * Et)
#   T2 = -1 / E1
#   T3 = exp(-(tau-1)w) * [ z(2 - exp(-tau w))/Et + z/(2 tau) - z^2/(2 tau) - 1 ]
# with E1 = -expm1(-w), Et = -expm1(-tau w).  B(w) -> 0 linearly at w = 0;
# the residual cancellation below _W_SERIES is handled by a Taylor series.

_SER_DEG = 16
_W_SERIES = 0.05


def _ser_mul(a, b):
    return np.convolve(a, b)[: _SER_DEG + 1]


def _ser_inv(a):
    # reciprocal of a power series with a[0] == 1
    out = np.zeros(_SER_DEG + 1, dtype=complex)
    out[0] = 1.0
    for k in range(1, _SER_DEG + 1):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1][: k])
    return out


def _ser_exp_aw(a):
    k = np.arange(_SER_DEG + 1)
    return np.power(complex(a), k) / np.array([math.factorial(int(i)) for i in k])


def _bracket_series(z: complex, tau: float) -> np.ndarray:
    """Taylor coefficients of w*B(w) around w = 0 (see module notes)."""
    k = np.arange(_SER_DEG + 1)
    fact = np.array([math.factorial(int(i) + 1) for i in k], dtype=float)
    q1 = (-1.0) ** k / fact                      # (1 - e^-w)/w
    qt = (-tau) ** k / fact                      # (1 - e^-tau w)/(tau w)
    g1 = _ser_inv(q1.astype(complex))
    gt = _ser_inv(qt.astype(complex))
    ptil = np.power(tau - z, k + 1) / fact       # expm1((tau-z)w)/w
    em = _ser_exp_aw(-(tau - 1.0))               # exp(-(tau-1)w)
    two_minus = -np.power(-tau, k) / np.array(
        [math.factorial(int(i)) for i in k]
    )                                            # 2 - e^{-tau w}
    two_minus[0] += 2.0

    t1 = _ser_mul(em, _ser_mul(ptil, _ser_mul(g1, gt))) / tau
    t3_inner = z * _ser_mul(two_minus, gt) / tau
    t3_inner[1] += z / (2 * tau) - z * z / (2 * tau) - 1.0
    t3 = _ser_mul(em, t3_inner)
    bw = t1 - g1 + t3
    # both leading coefficients vanish analytically; drop rounding residue
    bw[0] = 0.0
    bw[1] = 0.0
    return bw


def _bracket_stable(w: np.ndarray, z: complex, tau: float) -> np.ndarray:
    e1 = -np.expm1(-w)
    et = -np.expm1(-tau * w)
    emt1 = np.exp(-(tau - 1.0) * w)
    t1 = emt1 * np.expm1((tau - z) * w) / (e1 * et)
    t2 = -1.0 / e1
    t3 = emt1 * (
        z * (2.0 - np.exp(-tau * w)) / et + z / (2 * tau) - z * z / (2 * tau) - 1.0
    )
    return t1 + t2 + t3


@lru_cache(maxsize=64)
def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panels(w0: float, w_max: float, max_len: float):
    """Geometric panel edges on [w0, w_max] with a hard cap on panel length."""
    edges = [w0]
    length = max(0.05, w0)
    while edges[-1] < w_max:
        length = min(length * 1.7, max_len)
        edges.append(min(edges[-1] + length, w_max))
    return np.asarray(edges)


def _log_dg_integral_one(zi: complex, tau: float, nodes_per_panel: int = 24) -> complex:
    if zi.real <= 0:
        raise ValueError("integral route requires Re z > 0")
    # split point: keep |z|*w small so the head Taylor series converges fast
    w_s = min(_W_SERIES, 0.5 / max(1.0, abs(zi)))
    rate = min(1.0, zi.real, tau)
    w_max = w_s + 45.0 / rate
    max_len = 12.0 / max(1.0, abs(zi.imag))  # resolve oscillation exp(-i Im(z) w)
    edges = _panels(w_s, w_max, max_len)
    x, wts = _gl_nodes(nodes_per_panel)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    wn = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ww = (half[:, None] * wts[None, :]).ravel()

    b = _bracket_stable(wn, zi, tau)
    tail = -np.sum(b * np.exp(-wn) / wn * ww)

    # series piece on (0, w_s): integrate -e^{-w} (wB)/w^2 termwise
    bw = _bracket_series(zi, tau)
    f = _ser_mul(bw, _ser_exp_aw(-1.0))          # still O(w^2)
    kk = np.arange(2, _SER_DEG + 1)
    head = -np.sum(f[2:] * w_s ** (kk - 1) / (kk - 1))
    return complex(head + tail)


def _log_dg_integral(z, tau: float, nodes_per_panel: int = 24):
    """log G(z;tau) by quadrature; z scalar or array, Re z > 0 required."""
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(zs.shape, dtype=complex)
    flat = out.ravel()
    for i, zi in enumerate(zs.ravel()):
        flat[i] = _log_dg_integral_one(complex(zi), tau, nodes_per_panel)
    return out if np.ndim(z) else complex(out.ravel()[0])


# ---------------------------------------------------------------------------
# Double gamma: asymptotic route
# ---------------------------------------------------------------------------


@lru_cache(maxsize=128)
def _stirling_coeffs(tau: float):
    a0 = tau / 12.0 + 0.25 + 1.0 / (12.0 * tau)
    a1 = -0.5 * (1.0 + 1.0 / tau)
    a2 = 1.0 / (2.0 * tau)
    b2 = -(1.5 + math.log(tau)) / (2.0 * tau)
    b1 = 0.5 * ((1.0 + 1.0 / tau) * (1.0 + math.log(tau)) + math.log(2.0 * math.pi))
    log_g_half = _log_dg_integral_one(0.5 + 0j, tau).real
    log_g_tau = _log_dg_integral_one(tau + 0j, 2.0 * tau).real
    b0 = (
        2.0 * log_g_half
        + log_g_tau
        - (1.0 + tau) / 2.0 * math.log(2.0 * math.pi)
        - a0 * math.log(tau ** 3 / 2.0)
        - math.log(2.0)
    ) / 3.0
    return a0, a1, a2, b2, b1, b0


@lru_cache(maxsize=128)
def _stirling_remainder(tau: float) -> tuple:
    """Coefficients d_k of the O(1/z) remainder series, sum d_k / z^k.

    The closed-form expansion carries only the (a_i, b_i) terms; the residual
    is an analytic series in 1/z with tau-dependent real coefficients.  We
    recover the first few by collocation against the integral route on the
    real axis, which extends to complex z by analytic continuation.
    """
    zs = np.array([25.0, 35.0, 50.0, 70.0, 100.0])
    a0, a1, a2, b2, b1, b0 = _stirling_coeffs(tau)
    main = (a2 * zs * zs + a1 * zs + a0) * np.log(zs) + b2 * zs * zs + b1 * zs + b0
    exact = np.array([_log_dg_integral_one(z + 0j, tau).real for z in zs])
    resid = exact - main
    A = np.vstack([zs ** (-k) for k in (1, 2, 3)]).T
    d, *_ = np.linalg.lstsq(A, resid, rcond=None)
    return tuple(d)


def _log_dg_stirling(z, tau: float):
    a0, a1, a2, b2, b1, b0 = _stirling_coeffs(tau)
    d1, d2, d3 = _stirling_remainder(tau)
    z = np.asarray(z, dtype=complex)
    lz = np.log(z)
    out = (a2 * z * z + a1 * z + a0) * lz + b2 * z * z + b1 * z + b0
    out = out + d1 / z + d2 / z ** 2 + d3 / z ** 3
    return out if out.ndim else out[()]


# ---------------------------------------------------------------------------
# Public double gamma
# ---------------------------------------------------------------------------


def log_double_gamma(z, tau: float, stirling_threshold: float | None = None):
    """log G(z; tau) (up to multiples of 2*pi*i for complex z).

    Route selection: asymptotic series for |z| above the threshold,
    quadrature of the integral representation for moderate Re z > 0, and
    upward recursion G(z+1;tau) = Gamma(z/tau) G(z;tau) for Re z <= 0.
    Raises ``PoleError`` at (and very near) the zeros z = -m*tau - n.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    z0 = complex(z)
    thresh = STIRLING_THRESHOLD if stirling_threshold is None else stirling_threshold

    shift_log = 0.0 + 0.0j
    zc = z0
    while zc.real <= 0.05:
        # log G(zc) = log G(zc + 1) - log Gamma(zc / tau)
        arg = zc / tau
        if arg.imag == 0.0 and abs(arg.real - round(arg.real)) < 1e-13 and round(arg.real) <= 0:
            raise PoleError(f"double gamma zero at z = {z}")
        shift_log -= loggamma(arg)
        zc = zc + 1.0
    if abs(zc) > thresh:
        core = _log_dg_stirling(zc, tau)
    else:
        core = _log_dg_integral(zc, tau)
    res = core + shift_log
    if z0.imag == 0.0:
        return complex(res).real if abs(complex(res).imag) < 1e-9 else complex(res)
    return complex(res)


def double_gamma(z, tau: float):
    """The double gamma function G(z; tau) itself.

    Near a zero (within ~1e-12 of z = -m*tau - n) this returns 0.0 rather
    than raising, matching the entire-function behavior.
    """
    try:
        lg = log_double_gamma(z, tau)
    except PoleError:
        return 0.0
    val = np.exp(lg)
    zc = complex(z)
    if zc.imag == 0.0 and not isinstance(lg, complex):
        return float(val)
    return complex(val)


def _log_dg_contour(z_arr: np.ndarray, tau: float) -> np.ndarray:
    """Vectorized log G for contour work: Re z > 0 enforced by callers.

    Always uses the quadrature route (exact up to quadrature error for any
    imaginary part), which keeps Mellin-Barnes integrands free of the
    asymptotic-series truncation error.
    """
    return np.asarray(_log_dg_integral(z_arr, tau), dtype=complex)
