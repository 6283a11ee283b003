"""
dggkit.dgg_bounds

The Davies-Gaffney-Grigor'yan bound for the continuous-time heat kernel on
graphs, and the ingredients of its proof:

    alpha(gamma)  = max{4, (sqrt5 - 1)/gamma + 2}
    K(t, x)       = exp(2 zeta(alpha D_m t + 1/2, d(x, B)))
    I(t)          = sum_{x in Omega} K(t, x) u(t, x)^2 m(x)

and, for subsets B1, B2 at distance d,

    sum_{B1 x B2} p_t m m <= sqrt(m(B1) m(B2)) exp(-(1-gamma) mu t) exp(-zeta(alpha D_m t + 1, d))
                                                              (0 < gamma < 1)
    sum_{B1 x B2} p_t m m <= sqrt(m(B1) m(B2)) exp(-zeta(D_m t, d) / 2)   (gamma = 1)
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .config import get_tolerance
from .graph_core import (
    MeasuredGraph, SubsetLike, as_subset, distance, distances_from, measure_of,
    structural_constants,
)
from .heat_kernel import heat_evolve_grid, heat_kernels
from .legendre import arcsinh, chi, lambda_star, zeta
from .operators import dirichlet_spectrum
from .report import STATUS_FAIL, VerificationReport

logger = logging.getLogger(__name__)

GOLDEN_GAMMA = (math.sqrt(5.0) - 1.0) / 2.0

MODE_THEOREM = "theorem"
MODE_COROLLARY = "corollary"
MODES = (MODE_THEOREM, MODE_COROLLARY)


class RegimeError(ValueError):
    """A corollary was evaluated outside the time regime it is stated for."""


def alpha(gamma: float) -> float:
    """Time rescaling constant of the weight K; always >= 4."""
    gamma = float(gamma)
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma!r}")
    return max(4.0, (math.sqrt(5.0) - 1.0) / gamma + 2.0)


@dataclass(frozen=True)
class DggParams:
    """
    gamma in (0, 1]; beta > 0 (corollary regime t >= beta d); D_m > 0;
    mu >= 0 (spectral bottom, or mu_1 of a Dirichlet domain).
    """
    gamma: float
    beta: float = 1.0
    D_m: float = 1.0
    mu: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if not self.D_m > 0:
            raise ValueError(f"D_m must be positive, got {self.D_m!r}")
        if not self.mu >= 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu!r}")

    @property
    def alpha(self) -> float:
        return alpha(self.gamma)

    @property
    def mu_exponent(self) -> float:
        """Coefficient of mu t in the exponential factor: 1 - gamma."""
        return 1.0 - self.gamma

    @classmethod
    def for_graph(
        cls,
        g: MeasuredGraph,
        gamma: float,
        beta: float = 1.0,
        mu: float = 0.0,
    ) -> "DggParams":
        return cls(gamma=gamma, beta=beta, D_m=structural_constants(g).D_m, mu=mu)

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "beta": self.beta,
            "D_m": self.D_m,
            "mu": self.mu,
            "alpha": self.alpha,
        }


# ======================================================================
# Weight function
# ======================================================================

def _weight_time(t: float, params: DggParams) -> float:
    return params.alpha * params.D_m * float(t) + 0.5


def imp_log_weight(t: float, dist: float, params: DggParams) -> float:
    """log K(t, x) = 2 zeta(alpha D_m t + 1/2, dist)."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    return 2.0 * zeta(_weight_time(t, params), dist)


def imp_weight(t: float, dist: float, params: DggParams) -> float:
    """K(t, x) for a vertex at distance `dist` from B; +inf on overflow."""
    try:
        return math.exp(imp_log_weight(t, dist, params))
    except OverflowError:
        return math.inf


def _log_weight_rate(T: float, dist: float, params: DggParams) -> float:
    """d/dt log K at weight time T, by a central difference in T."""
    h = 1e-5 * T
    return params.alpha * params.D_m * (zeta(T + h, dist) - zeta(T - h, dist)) / h


def check_weight_condition(
    g: MeasuredGraph,
    B: SubsetLike,
    params: DggParams,
    t_grid: Sequence[float],
) -> VerificationReport:
    """
    Evaluate, for every edge (x, y) and grid time t, the weight condition

        (K_x + K_y - 2(1-gamma) sqrt(K_x K_y))^2
            <= (K_t,x / D_m - 2 gamma K_x) (K_t,y / D_m - 2 gamma K_y)

    with K_t = 2 zeta_t K, and its equivalent form in eta = log K / 2:

        (chi(eta_x - eta_y) + gamma)^2 <= (alpha chi(lambda_x) + gamma)(alpha chi(lambda_y) + gamma).

    Entries carry the dimensionless chi-form margin. The K-form is evaluated
    with K divided by the larger of K_x, K_y (both sides are 2-homogeneous
    in K), takes K_t from a central difference of log K in time rather than
    from chi, and must equal 4 K_x K_y times the chi-form margin.
    """
    times = _check_grid(t_grid)
    B = as_subset(g, B)
    dist = distances_from(g, B)
    gamma, a, D_m = params.gamma, params.alpha, params.D_m
    tol = get_tolerance("weight")
    agreement_tol = 1e-7

    report = VerificationReport(
        check="weight-condition",
        params={**params.as_dict(), "B": sorted(B.members)},
        grid={"t": times},
    )
    rows, cols = np.nonzero(np.triu(g.weights))
    disagreements = 0
    for t in times:
        T = _weight_time(t, params)
        for i, j in zip(rows.tolist(), cols.tolist()):
            di, dj = float(dist[i]), float(dist[j])
            eta_i, eta_j = zeta(T, di), zeta(T, dj)
            chi_i, chi_j = chi(lambda_star(T, di)), chi(lambda_star(T, dj))

            lhs = (chi(eta_i - eta_j) + gamma) ** 2
            rhs = (a * chi_i + gamma) * (a * chi_j + gamma)

            # K-form with K rescaled by the edge maximum
            top = max(eta_i, eta_j)
            k_i, k_j = math.exp(2.0 * (eta_i - top)), math.exp(2.0 * (eta_j - top))
            kt_i = _log_weight_rate(T, di, params) * k_i
            kt_j = _log_weight_rate(T, dj, params) * k_j
            k_lhs = (k_i + k_j - 2.0 * (1.0 - gamma) * math.sqrt(k_i * k_j)) ** 2
            k_rhs = (kt_i / D_m - 2.0 * gamma * k_i) * (kt_j / D_m - 2.0 * gamma * k_j)
            expected = 4.0 * k_i * k_j * (rhs - lhs)
            scale = max(abs(k_lhs), abs(k_rhs), 1e-300)
            forms_agree = abs((k_rhs - k_lhs) - expected) <= agreement_tol * scale
            if not forms_agree:
                disagreements += 1

            margin = rhs - lhs
            report.add(
                f"t={t:g} edge {g.vertices[i]}-{g.vertices[j]}",
                lhs=lhs,
                rhs=rhs,
                passed=margin >= -tol and forms_agree,
                t=t,
                edge=[g.vertices[i], g.vertices[j]],
                d=[int(di), int(dj)],
                k_form_margin=k_rhs - k_lhs,
                forms_agree=forms_agree,
            )
    if disagreements:
        report.notes.append(f"K-form and chi-form disagree on {disagreements} evaluations")
    return report


# ======================================================================
# Integral maximum principle
# ======================================================================

def imp_monitor(
    g: MeasuredGraph,
    Omega: Optional[SubsetLike],
    B: SubsetLike,
    params: DggParams,
    t_grid: Sequence[float],
) -> VerificationReport:
    """
    Track J(t) = exp(2 (1-gamma) mu_1(Omega) t) I(t) for u(0) = 1_B on the
    Dirichlet domain Omega (whole graph when None) and check that it is
    nonincreasing along the grid up to the configured relative slack.
    """
    times = _check_grid(t_grid)
    domain = g.whole() if Omega is None else as_subset(g, Omega)
    B = as_subset(g, B)
    start = B.mask() & domain.mask()
    if not start.any():
        raise ValueError("B does not meet the domain")

    mu1 = dirichlet_spectrum(g, domain).mu1 if Omega is not None else 0.0
    mu1 = max(mu1, 0.0)
    dist = distances_from(g, B)
    idx = domain.indices
    u = heat_evolve_grid(g, domain, start.astype(float), times)

    log_values: List[float] = []
    for row, t in enumerate(times):
        log_k = np.array([imp_log_weight(t, float(d), params) for d in dist[idx]])
        mass = u[row, idx] ** 2 * g.measure[idx]
        log_i = float(logsumexp(log_k, b=mass)) if np.any(mass > 0) else -math.inf
        log_values.append(2.0 * params.mu_exponent * mu1 * t + log_i)

    slack = get_tolerance("imp_relative_slack")
    report = VerificationReport(
        check="imp-monitor",
        params={
            **params.as_dict(),
            "mu1": mu1,
            "mu_source": "dirichlet" if Omega is not None else "whole graph",
            "B": sorted(B.members),
            "domain_size": len(domain),
        },
        grid={"t": times},
    )
    for k in range(1, len(times)):
        step = log_values[k] - log_values[k - 1]
        ratio = math.exp(step) if math.isfinite(step) else (0.0 if step < 0 else math.inf)
        report.add(
            f"t={times[k - 1]:g}->{times[k]:g}",
            lhs=ratio,
            rhs=1.0 + slack,
            t=times[k],
        )
    report.extra["log_sequence"] = log_values
    report.extra["sequence"] = [_safe_exp(v) for v in log_values]
    return report


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


# ======================================================================
# DGG right-hand sides
# ======================================================================

def dgg_rhs(
    m_B1: float,
    m_B2: float,
    dist: float,
    t: float,
    params: DggParams,
) -> float:
    """
    Right-hand side of the DGG bound: the shifted form for gamma < 1, the
    unshifted gamma = 1 form otherwise. At t = 0 with gamma = 1 the zeta
    term is its limit: +inf for dist >= 1, 0 for dist = 0.
    """
    if m_B1 <= 0 or m_B2 <= 0:
        raise ValueError("subset masses must be positive")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    prefactor = math.sqrt(m_B1 * m_B2)
    if params.gamma < 1:
        exponent = -params.mu_exponent * params.mu * t - zeta(params.alpha * params.D_m * t + 1.0, dist)
        return prefactor * math.exp(exponent)
    if t == 0:
        return prefactor if dist == 0 else 0.0
    return prefactor * math.exp(-0.5 * zeta(params.D_m * t, dist))


def corollary_constant(params: DggParams) -> float:
    """
    C3 = 2 alpha D_m beta arcsinh(1/(alpha D_m beta)) / (alpha D_m + 1) for
    gamma < 1, and C = beta arcsinh(1/(D_m beta)) for gamma = 1.
    """
    if params.gamma < 1:
        s = params.alpha * params.D_m * params.beta
        return 2.0 * s * arcsinh(1.0 / s) / (params.alpha * params.D_m + 1.0)
    return params.beta * arcsinh(1.0 / (params.D_m * params.beta))


def corollary_min_time(dist: float, params: DggParams) -> float:
    """Smallest t the Gaussian-form corollary is stated for."""
    if params.gamma < 1:
        return max(params.beta * dist, 1.0)
    return params.beta * dist


def dgg_corollary_rhs(
    m_B1: float,
    m_B2: float,
    dist: float,
    t: float,
    params: DggParams,
) -> Tuple[float, float]:
    """
    Gaussian-form bound sqrt(m1 m2) exp(-(1-gamma) mu t) exp(-C d^2 / 4t)
    and its constant. Raises RegimeError when t is below the regime.
    """
    if m_B1 <= 0 or m_B2 <= 0:
        raise ValueError("subset masses must be positive")
    lowest = corollary_min_time(dist, params)
    if t < lowest or t < 0:
        raise RegimeError(
            f"corollary regime not applicable: t={t!r} < {lowest!r}"
        )
    constant = corollary_constant(params)
    prefactor = math.sqrt(m_B1 * m_B2)
    if dist == 0:
        gaussian = 1.0
    else:
        gaussian = math.exp(-constant * dist * dist / (4.0 * t))
    mu_factor = math.exp(-params.mu_exponent * params.mu * t) if params.gamma < 1 else 1.0
    return prefactor * mu_factor * gaussian, constant


# ======================================================================
# Verification
# ======================================================================

def _check_grid(t_grid: Sequence[float]) -> List[float]:
    times = [float(t) for t in t_grid]
    if not times:
        raise ValueError("time grid is empty")
    if any(not math.isfinite(t) or t < 0 for t in times):
        raise ValueError("time grid must hold finite nonnegative times")
    return times


def dgg_pass_threshold(rhs: float, m_B1: float, m_B2: float) -> float:
    """Smallest margin (RHS - LHS) still counted as passing."""
    return -(
        get_tolerance("dgg_relative") * rhs
        + get_tolerance("dgg_absolute_floor") * math.sqrt(m_B1 * m_B2)
    )


def verify_dgg(
    g: MeasuredGraph,
    B1: SubsetLike,
    B2: SubsetLike,
    params: DggParams,
    t_grid: Sequence[float],
    mode: str = MODE_THEOREM,
    Omega: Optional[SubsetLike] = None,
) -> VerificationReport:
    """
    Compare sum_{B1 x B2} p_t m m with the DGG right-hand side on a grid.

    Without Omega the whole-graph kernel is used and mu = 0 (spectral bottom
    of a finite connected graph); with Omega the Dirichlet kernel and
    mu = mu_1(Omega). In corollary mode grid times below the regime are
    skipped and listed in the notes.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    times = _check_grid(t_grid)
    B1, B2 = as_subset(g, B1), as_subset(g, B2)
    domain = g.whole() if Omega is None else as_subset(g, Omega)
    if Omega is None:
        mu, mu_source = 0.0, "spectral bottom of a finite connected graph"
    else:
        mu, mu_source = max(dirichlet_spectrum(g, domain).mu1, 0.0), "dirichlet mu_1(Omega)"
    used = replace(params, mu=mu)

    d = distance(g, B1, B2)
    m1, m2 = measure_of(g, B1), measure_of(g, B2)

    report = VerificationReport(
        check=f"dgg-{mode}",
        params={
            **used.as_dict(),
            "mu_source": mu_source,
            "mode": mode,
            "distance": d,
            "m_B1": m1,
            "m_B2": m2,
            "domain_size": len(domain),
        },
        grid={"t": times},
    )
    if d == 0:
        logger.warning("B1 and B2 overlap (distance 0); checking anyway")
        report.notes.append("overlapping subsets: d(B1, B2) = 0")
    if mode == MODE_COROLLARY:
        report.params["constant"] = corollary_constant(used)

    skipped: List[float] = []
    for kernel in heat_kernels(g, domain, times):
        t = kernel.time
        lhs = kernel.block_mass(B1, B2)
        if mode == MODE_THEOREM:
            rhs = dgg_rhs(m1, m2, d, t, used)
        else:
            try:
                rhs, _ = dgg_corollary_rhs(m1, m2, d, t, used)
            except RegimeError:
                skipped.append(t)
                continue
        threshold = dgg_pass_threshold(rhs, m1, m2)
        report.add(f"t={t:g}", lhs=lhs, rhs=rhs, passed=(rhs - lhs) >= threshold, t=t)

    if skipped:
        report.notes.append(f"outside corollary regime, skipped t = {skipped}")
    if not report.entries:
        report.status = STATUS_FAIL
        report.notes.append("no grid time inside the regime")
    failures = report.failures
    if failures:
        logger.warning("DGG %s check failed at %d grid points (worst t=%s)",
                       mode, len(failures), report.worst.context.get("t"))
    return report
