"""
dggkit.legendre

The Legendre associate of chi(s) = cosh(s) - 1:

    zeta(t, d)   = max_{lambda >= 0} { d lambda - chi(lambda) t }
                 = d arcsinh(d/t) - sqrt(d^2 + t^2) + t
    lambda(t, d) = arcsinh(d/t)          (the maximizer)
    h(a)         = the t with zeta(t, 1) = a

All functions take and return Python floats.
"""

import math

import numpy as np
from scipy.optimize import minimize_scalar

from .report import VerificationReport

# below this |x| arcsinh switches to its Taylor series
_ASINH_SERIES_CUTOFF = 1e-5
# above this |x| the closed form would overflow x^2
_ASINH_LARGE = 1e8
# below this d/t zeta switches to its Taylor series
_ZETA_SERIES_CUTOFF = 1e-6

H_BRACKET = (1e-8, 1.0)
H_MAX_ITERATIONS = 200


def arcsinh(x: float) -> float:
    """log(x + sqrt(x^2 + 1)), odd, evaluated without cancellation."""
    a = abs(float(x))
    if a < _ASINH_SERIES_CUTOFF:
        a2 = a * a
        value = a * (1.0 - a2 / 6.0 + 3.0 * a2 * a2 / 40.0 - 15.0 * a2 * a2 * a2 / 336.0)
    elif a > _ASINH_LARGE:
        value = math.log(2.0 * a) + 0.25 / (a * a)
    else:
        value = math.log1p(a + a * a / (1.0 + math.sqrt(1.0 + a * a)))
    return math.copysign(value, x)


def chi(s: float) -> float:
    """cosh(s) - 1 = 2 sinh(s/2)^2."""
    half = math.sinh(0.5 * float(s))
    return 2.0 * half * half


def _check_td(t: float, d: float) -> None:
    if not t > 0 or not math.isfinite(t):
        raise ValueError(f"zeta needs t > 0, got {t!r}")
    if not d >= 0:
        raise ValueError(f"zeta needs d >= 0, got {d!r}")


def zeta(t: float, d: float) -> float:
    t, d = float(t), float(d)
    _check_td(t, d)
    if d == 0:
        return 0.0
    r = d / t
    if r < _ZETA_SERIES_CUTOFF:
        r2 = r * r
        return t * r2 * (0.5 - r2 / 24.0 + r2 * r2 / 80.0)
    # -sqrt(d^2+t^2) + t rewritten as -d^2 / (sqrt(d^2+t^2) + t)
    return d * arcsinh(r) - d * d / (math.hypot(d, t) + t)


def lambda_star(t: float, d: float) -> float:
    t, d = float(t), float(d)
    _check_td(t, d)
    return arcsinh(d / t)


def zeta_t(t: float, d: float) -> float:
    """d zeta / dt = -chi(lambda(t, d)) = -(sqrt(1 + (d/t)^2) - 1)."""
    t, d = float(t), float(d)
    _check_td(t, d)
    r = d / t
    return -(r * r) / (math.sqrt(1.0 + r * r) + 1.0)


def zeta_d(t: float, d: float) -> float:
    """d zeta / dd = lambda(t, d)."""
    return lambda_star(t, d)


def zeta_variational(t: float, d: float) -> float:
    """
    max_{lambda >= 0} { d lambda - chi(lambda) t } by bounded scalar search.

    Used as an independent cross-check of the closed form.
    """
    t, d = float(t), float(d)
    _check_td(t, d)
    if d == 0:
        return 0.0
    upper = 2.0 * arcsinh(d / t) + 1.0
    res = minimize_scalar(
        lambda lam: -(d * lam - chi(lam) * t),
        bounds=(0.0, upper),
        method="bounded",
        options={"xatol": 1e-14 * max(1.0, upper), "maxiter": 500},
    )
    return float(-res.fun)


def h_inverse(a: float) -> float:
    """
    The unique t > 0 with zeta(t, 1) = a.

    zeta(., 1) is strictly decreasing from +inf (t -> 0) to 0 (t -> inf), so
    bisection on a bracket [lo, hi] with zeta(lo, 1) >= a >= zeta(hi, 1)
    converges. The bracket starts at [1e-8, 1]; hi doubles and lo halves
    until it brackets a.
    """
    a = float(a)
    if not a > 0 or not math.isfinite(a):
        raise ValueError(f"h is defined for a > 0, got {a!r}")

    lo, hi = H_BRACKET
    while zeta(hi, 1.0) > a:
        hi *= 2.0
    while zeta(lo, 1.0) < a:
        lo *= 0.5
        if lo == 0.0:
            raise ValueError(f"h({a!r}) underflows")

    for _ in range(H_MAX_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if zeta(mid, 1.0) > a:
            lo = mid
        else:
            hi = mid
    # closer endpoint of the final bracket
    if abs(zeta(lo, 1.0) - a) < abs(zeta(hi, 1.0) - a):
        return lo
    return hi


def sigma_factor(sigma: float) -> float:
    """sigma * arcsinh(1/sigma); increases to 1 as sigma -> inf."""
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return sigma * arcsinh(1.0 / sigma)


def zeta_bounds_check(t: float, d: float, sigma: float) -> VerificationReport:
    """
    Compare zeta with its quadratic envelopes:

        zeta(t, d) <= d^2 / 2t                                (always)
        zeta(t, d) >= sigma arcsinh(1/sigma) d^2 / 2t         (t >= sigma d)
    """
    t, d, sigma = float(t), float(d), float(sigma)
    _check_td(t, d)
    factor = sigma_factor(sigma)
    value = zeta(t, d)
    quadratic = d * d / (2.0 * t)
    slack = 1e-12 * max(1.0, quadratic)

    report = VerificationReport(
        check="zeta-bounds",
        params={"t": t, "d": d, "sigma": sigma, "sigma_factor": factor, "zeta": value},
    )
    upper = report.add("upper", lhs=value, rhs=quadratic, t=t, d=d)
    upper.passed = upper.margin >= -slack
    if t >= sigma * d:
        lower = report.add("lower", lhs=factor * quadratic, rhs=value, t=t, d=d)
        lower.passed = lower.margin >= -slack
    else:
        report.notes.append("lower bound not applicable: t < sigma d")
    return report


def zeta_grid(ts: np.ndarray, d: float) -> np.ndarray:
    return np.array([zeta(float(t), d) for t in ts])
