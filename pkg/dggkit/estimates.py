"""
dggkit.estimates

Inequalities derived from the DGG bound and the Li-Yau gradient estimate:

  * eigenvalue upper bounds for k disjoint sets and their simplified form
  * diameter and r-neighborhood (isoperimetric) bounds
  * convergence of the heat kernel to 1/m(V) on finite graphs
  * Li-Yau, strong cut-off Li-Yau, Harnack and Cheng checks, all conditional
    on a curvature certificate
  * fitting of the Gaussian heat kernel bound constants

Checks that depend on a curvature certificate never raise on a violated
inequality; the report is marked "certificate falsified" instead.
"""

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .config import get_tolerance
from .curvature import CurvatureCertificate, verify_strong_cutoff
from .dgg_bounds import DggParams, RegimeError, corollary_constant
from .graph_core import (
    Exhaustion, MeasuredGraph, Subset, SubsetLike, as_subset, ball, diameter,
    distance, measure_of, neighborhood, structural_constants,
)
from .heat_kernel import MonotonicityError, heat_evolve_grid, heat_kernels
from .legendre import arcsinh, h_inverse, sigma_factor
from .operators import FunctionLike, _values, dirichlet_spectrum, gamma_values, laplacian_values
from .report import STATUS_CUTOFF_REJECTED, STATUS_FALSIFIED, VerificationReport

__all__ = [
    "EigenBoundInput", "EigenPairTerm", "GaussianFit", "HarnackParams", "RegimeError",
    "cheng_check", "diameter_bound", "diameter_check", "effective_K",
    "eigen_table_csv", "eigenvalue_check", "eigenvalue_upper_bound",
    "eigenvalue_upper_bound_simplified", "finite_mixing_check", "gaussian_fit",
    "harnack_check", "isoperimetric_bound", "isoperimetric_check",
    "li_yau_check", "li_yau_strong_check", "mixing_monitor",
]

logger = logging.getLogger(__name__)

SIGMA_AUTO = "auto"
# sigma chosen with delta replaced by 1, independent of the set distance
SIGMA_AUTO_UNIT = "auto-unit"
SigmaChoice = Union[float, str]


def effective_K(cert: CurvatureCertificate) -> float:
    """K >= 0 such that the certificate supports CDE(n, -K)."""
    return max(0.0, -cert.bound_K)


def _kn(K: float, n: float) -> float:
    # K n, with 0 * inf = 0
    return 0.0 if K == 0 else K * n


def _conditional_status(report: VerificationReport) -> VerificationReport:
    if report.failures:
        report.status = STATUS_FALSIFIED
        worst = report.worst
        report.notes.append(
            f"violated at {worst.label}: lhs={worst.lhs:.12g} rhs={worst.rhs:.12g}"
        )
        logger.warning("%s: certificate falsified at %s", report.check, worst.label)
    return report


# ======================================================================
# Eigenvalue bounds
# ======================================================================

@dataclass(frozen=True, eq=False)
class EigenBoundInput:
    """k >= 2 pairwise disjoint nonempty sets at mutual distance >= 1."""
    sets: Tuple[Subset, ...]
    graph: MeasuredGraph
    delta: int = field(init=False)

    def __post_init__(self) -> None:
        sets = tuple(as_subset(self.graph, A) for A in self.sets)
        if len(sets) < 2:
            raise ValueError("need at least two sets")
        if len(sets) > len(self.graph):
            raise ValueError("more sets than vertices")
        delta = min(distance(self.graph, A, B) for A, B in itertools.combinations(sets, 2))
        if delta == 0:
            raise ValueError("sets must be pairwise disjoint: some pair meets (delta = 0)")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "delta", int(delta))

    @classmethod
    def from_sets(cls, g: MeasuredGraph, sets: Sequence[SubsetLike]) -> "EigenBoundInput":
        return cls(tuple(as_subset(g, A) for A in sets), g)

    @property
    def k(self) -> int:
        return len(self.sets)


class EigenPairTerm(NamedTuple):
    pair: Tuple[int, int]
    log_ratio: float
    h_value: float
    term: float


def _log_ratio(g: MeasuredGraph, A: Subset, B: Subset) -> float:
    """log(2 m(V) / sqrt(m(A) m(B)))."""
    return math.log(2.0 * g.total_measure / math.sqrt(measure_of(g, A) * measure_of(g, B)))


def eigenvalue_upper_bound(inp: EigenBoundInput) -> Tuple[float, List[EigenPairTerm]]:
    """
    lambda_k <= (D_m / delta) max_{i != j} L_ij / h(2 L_ij / delta),
    L_ij = log(2 m(V) / sqrt(m(A_i) m(A_j))), h the inverse of zeta(., 1).
    """
    g = inp.graph
    D_m = structural_constants(g).D_m
    rows: List[EigenPairTerm] = []
    for (i, A), (j, B) in itertools.combinations(enumerate(inp.sets), 2):
        L = _log_ratio(g, A, B)
        h = h_inverse(2.0 * L / inp.delta)
        rows.append(EigenPairTerm((i + 1, j + 1), L, h, D_m / inp.delta * L / h))
    return max(r.term for r in rows), rows


def _auto_sigma(max_log: float, delta: float) -> float:
    try:
        return 1.0 / math.sinh(4.0 * max_log / delta)
    except OverflowError:
        return 0.0


def resolve_sigma(inp: EigenBoundInput, sigma: SigmaChoice = SIGMA_AUTO) -> float:
    max_log = max(
        _log_ratio(inp.graph, A, B) for A, B in itertools.combinations(inp.sets, 2)
    )
    if sigma == SIGMA_AUTO:
        value = _auto_sigma(max_log, inp.delta)
    elif sigma == SIGMA_AUTO_UNIT:
        value = _auto_sigma(max_log, 1.0)
    else:
        value = float(sigma)
    if not value > 0:
        raise ValueError(f"sigma must be positive, got {value!r}")
    return value


def eigenvalue_upper_bound_simplified(
    inp: EigenBoundInput,
    sigma: SigmaChoice = SIGMA_AUTO,
) -> float:
    """
    lambda_k <= 4 D_m / (sigma arcsinh(1/sigma) delta^2) max_{i != j} L_ij^2.

    sigma is a positive number, "auto" (1/sinh(4 max L / delta)) or
    "auto-unit" (the same with delta replaced by 1).
    """
    g = inp.graph
    value = resolve_sigma(inp, sigma)
    max_log = max(_log_ratio(g, A, B) for A, B in itertools.combinations(inp.sets, 2))
    D_m = structural_constants(g).D_m
    return 4.0 * D_m * max_log ** 2 / (sigma_factor(value) * inp.delta ** 2)


def eigen_table_csv(rows: Sequence[EigenPairTerm]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["pair", "log_ratio", "h_value", "term"])
    for r in rows:
        writer.writerow([f"{r.pair[0]}-{r.pair[1]}", repr(r.log_ratio), repr(r.h_value), repr(r.term)])
    return buffer.getvalue()


def eigenvalue_check(
    inp: EigenBoundInput,
    sigma: SigmaChoice = SIGMA_AUTO,
) -> VerificationReport:
    """
    Compare both bounds with the eigensolved lambda_k, and check that the
    simplified bound relaxes the exact one whenever 2 L / delta lies in the
    sigma regime (always the case for the automatic choices).
    """
    g = inp.graph
    spectrum = dirichlet_spectrum(g)
    lam_k = float(spectrum.eigenvalues[inp.k - 1])
    bound, rows = eigenvalue_upper_bound(inp)
    sigma_value = resolve_sigma(inp, sigma)
    simplified = eigenvalue_upper_bound_simplified(inp, sigma_value)

    report = VerificationReport(
        check="eigenvalue-bound",
        params={
            "k": inp.k,
            "delta": inp.delta,
            "D_m": structural_constants(g).D_m,
            "sigma": sigma_value,
            "sigma_choice": sigma if isinstance(sigma, str) else "explicit",
            "lambda_k": lam_k,
            "bound": bound,
            "simplified_bound": simplified,
            "set_sizes": [len(A) for A in inp.sets],
        },
    )
    report.add("theorem", lhs=lam_k, rhs=bound)
    report.add("simplified", lhs=lam_k, rhs=simplified)

    max_log = max(r.log_ratio for r in rows)
    if 2.0 * max_log / inp.delta <= 0.5 * arcsinh(1.0 / sigma_value) * (1.0 + 1e-12):
        slack = 1e-9 * max(1.0, bound)
        report.add("relaxation", lhs=bound, rhs=simplified, passed=simplified - bound >= -slack)
    else:
        report.notes.append("sigma outside the relaxation regime; relaxation not checked")
    report.extra["pairs"] = [r._asdict() for r in rows]
    return report


# ======================================================================
# Diameter and isoperimetric corollaries
# ======================================================================

def diameter_bound(g: MeasuredGraph) -> float:
    """
    D <= 2 sqrt(D_m / (sigma arcsinh(1/sigma) lambda_2)) log(2 m(V) / m_min)
    with sigma = 1 / sinh(4 log(2 m(V) / m_min)).
    """
    consts = structural_constants(g)
    L = math.log(2.0 * g.total_measure / consts.m_min)
    sigma = _auto_sigma(L, 1.0)
    if sigma <= 0:
        raise ValueError("sigma underflows for this graph volume")
    lam2 = dirichlet_spectrum(g).spectral_gap
    return 2.0 * math.sqrt(consts.D_m / (sigma_factor(sigma) * lam2)) * L


def diameter_check(g: MeasuredGraph) -> VerificationReport:
    true_diameter = diameter(g)
    bound = diameter_bound(g)
    report = VerificationReport(
        check="diameter",
        params={"diameter": true_diameter, "bound": bound,
                "lambda_2": dirichlet_spectrum(g).spectral_gap},
    )
    report.add("diameter", lhs=float(true_diameter), rhs=bound)
    return report


def isoperimetric_bound(g: MeasuredGraph, U: SubsetLike, r: int) -> float:
    """
    m(N_r(U)) >= m(V) (1 - 4 m(V)/m(U) exp(-(r+1) sqrt(lambda_2 sigma arcsinh(1/sigma) / D_m)))
    with sigma = 1 / sinh(2 log(2 m(V) / sqrt(m(U) m_min))).
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r!r}")
    U = as_subset(g, U)
    consts = structural_constants(g)
    volume = g.total_measure
    m_U = measure_of(g, U)
    L = math.log(2.0 * volume / math.sqrt(m_U * consts.m_min))
    try:
        sigma = 1.0 / math.sinh(2.0 * L)
    except OverflowError:
        raise ValueError("sigma underflows for this graph volume") from None
    lam2 = dirichlet_spectrum(g).spectral_gap
    rate = math.sqrt(lam2 * sigma_factor(sigma) / consts.D_m)
    return volume * (1.0 - 4.0 * volume / m_U * math.exp(-(r + 1) * rate))


def isoperimetric_check(
    g: MeasuredGraph,
    U: SubsetLike,
    radii: Sequence[int],
) -> VerificationReport:
    U = as_subset(g, U)
    report = VerificationReport(
        check="isoperimetric",
        params={"U": sorted(U.members), "m_U": measure_of(g, U), "volume": g.total_measure},
        grid={"r": [int(r) for r in radii]},
    )
    for r in radii:
        actual = measure_of(g, neighborhood(g, U, int(r)))
        report.add(f"r={int(r)}", lhs=isoperimetric_bound(g, U, int(r)), rhs=actual, r=int(r))
    return report


# ======================================================================
# Finite-graph mixing
# ======================================================================

def _spectral_tail(g: MeasuredGraph, t: float) -> Tuple[np.ndarray, float]:
    """
    h_t(x, y) e^{lambda_2 t} = sum_{i >= 2} e^{-(lambda_i - lambda_2) t} phi_i(x) phi_i(y),
    and lambda_2.
    """
    spectrum = dirichlet_spectrum(g)
    lam = spectrum.eigenvalues[1:]
    phi = spectrum.eigenvectors[:, 1:]
    decay = np.exp(-(lam - lam[0]) * t)
    return (phi * decay[None, :]) @ phi.T, float(lam[0])


def mixing_monitor(g: MeasuredGraph, t_grid: Sequence[float]) -> VerificationReport:
    """
    With h_t = p_t - 1/m(V), check along the grid that h_t(x, x) e^{lambda_2 t}
    is nonincreasing at every vertex, and that
    |h_t(x, y)| <= sqrt(h_t(x, x) h_t(y, y)) at every grid time.
    """
    times = sorted(float(t) for t in t_grid)
    if len(times) < 2 or times[0] < 0:
        raise ValueError("mixing needs at least two nonnegative grid times")
    tol = get_tolerance("mixing")
    report = VerificationReport(check="mixing", grid={"t": times})

    scaled = [_spectral_tail(g, t) for t in times]
    lam2 = scaled[0][1]
    report.params.update({"lambda_2": lam2, "volume": g.total_measure})

    for k in range(1, len(times)):
        before, after = np.diag(scaled[k - 1][0]), np.diag(scaled[k][0])
        for i, x in enumerate(g.vertices):
            prev, cur = float(before[i]), float(after[i])
            report.add(
                f"t={times[k]:g} x={x}",
                lhs=cur,
                rhs=prev,
                passed=cur - prev <= tol * max(1.0, abs(prev)),
                t=times[k],
                vertex=x,
            )

    for t, (tail, _) in zip(times, scaled):
        diag = np.clip(np.diag(tail), 0.0, None)
        bound = np.sqrt(np.outer(diag, diag))
        gap = bound - np.abs(tail)
        i, j = np.unravel_index(int(np.argmin(gap)), gap.shape)
        lhs, rhs = float(abs(tail[i, j])), float(bound[i, j])
        report.add(
            f"t={t:g} cauchy-schwarz",
            lhs=lhs,
            rhs=rhs,
            passed=rhs - lhs >= -tol * max(1.0, rhs),
            t=t,
            pair=[g.vertices[i], g.vertices[j]],
        )
    return report


# ======================================================================
# Li-Yau and Harnack
# ======================================================================

def _li_yau_terms(
    g: MeasuredGraph,
    u: np.ndarray,
    q: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """(Gamma(sqrt u)/u, d_t sqrt(u)/sqrt(u)) at every vertex where u > 0."""
    root = np.sqrt(np.clip(u, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        gradient = gamma_values(g, root, root) / u
        # (Delta - q) u = d_t u, so d_t sqrt(u) / sqrt(u) = (Delta u - q u) / 2u
        time_term = (laplacian_values(g, u) - q * u) / (2.0 * u)
    return gradient, time_term


def _solution(
    g: MeasuredGraph,
    Omega: Optional[SubsetLike],
    u0: FunctionLike,
    times: Sequence[float],
    q: float,
) -> np.ndarray:
    u = heat_evolve_grid(g, Omega, u0, times)
    return u * np.exp(-q * np.asarray(times))[:, None]


def _require_positive(u: np.ndarray, region: Subset, times: Sequence[float]) -> None:
    values = u[:, region.indices]
    if np.any(values <= 0):
        row = int(np.argmin(values.min(axis=1)))
        raise ValueError(
            f"heat solution is not positive near x0 at t={times[row]!r}"
        )


def _positive_times(t_grid: Sequence[float]) -> List[float]:
    times = [float(t) for t in t_grid]
    if not times or any(not (t > 0 and math.isfinite(t)) for t in times):
        raise ValueError("Li-Yau checks need finite positive grid times")
    return times


def li_yau_check(
    g: MeasuredGraph,
    cert: CurvatureCertificate,
    x0: str,
    R: int,
    u0: FunctionLike,
    t_grid: Sequence[float],
    rho: Optional[float] = None,
    q: float = 0.0,
    Omega: Optional[SubsetLike] = None,
) -> VerificationReport:
    """
    Gradient estimate in the ball of radius R around x0 for u solving
    (Delta - d_t - q) u = 0 on a domain containing the 2R-ball.

    Nonnegative curvature and no rho:
        Gamma(sqrt u)/u - d_t sqrt(u)/sqrt(u) <= n/2t + n (1 + D_mu) D_m / R
    Otherwise, for rho in (0, 1):
        (1-rho) Gamma(sqrt u)/u - d_t sqrt(u)/sqrt(u) - q/2
            <= n/((1-rho) 2t) + n (2 + D_mu) D_m / ((1-rho) R) + K n / (2 rho)
    """
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R!r}")
    times = _positive_times(t_grid)
    n, K = cert.dimension_n, effective_K(cert)
    consts = structural_constants(g)
    if Omega is not None:
        domain = as_subset(g, Omega)
        if not ball(g, x0, 2 * R).members <= domain.members:
            raise ValueError("domain must contain the 2R-ball around x0")
    if q != 0.0 and rho is None:
        rho = 0.5
    weak = K == 0 and rho is None
    if not weak:
        rho = 0.5 if rho is None else float(rho)
        if not 0 < rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {rho!r}")

    values = _values(g, u0)
    if np.any(values < 0) or not np.any(values > 0):
        raise ValueError("initial datum must be nonnegative and not identically 0")
    u = _solution(g, Omega, values, times, q)
    region = ball(g, x0, R)
    _require_positive(u, ball(g, x0, R + 1), times)

    report = VerificationReport(
        check="li-yau",
        params={
            "form": "nonnegative curvature" if weak else "negative curvature",
            "x0": x0, "R": R, "n": n, "K": K, "rho": rho, "q": q,
            "D_m": consts.D_m, "D_mu": consts.D_mu,
            "certificate_status": cert.status,
        },
        grid={"t": times},
    )
    for row, t in enumerate(times):
        gradient, time_term = _li_yau_terms(g, u[row], q)
        if weak:
            rhs = n / (2.0 * t) + n * (1.0 + consts.D_mu) * consts.D_m / R
        else:
            rhs = (
                n / ((1.0 - rho) * 2.0 * t)
                + n * (2.0 + consts.D_mu) * consts.D_m / ((1.0 - rho) * R)
                + _kn(K, n) / (2.0 * rho)
            )
        for x in region.ordered:
            i = g.index(x)
            if weak:
                lhs = gradient[i] - time_term[i]
            else:
                lhs = (1.0 - rho) * gradient[i] - time_term[i] - 0.5 * q
            report.add(f"t={t:g} x={x}", lhs=float(lhs), rhs=rhs, t=t, vertex=x)
    return _conditional_status(report)


def li_yau_strong_check(
    g: MeasuredGraph,
    cert: CurvatureCertificate,
    phi: FunctionLike,
    x0: str,
    S: SubsetLike,
    c: float,
    R: float,
    u0: FunctionLike,
    t_grid: Sequence[float],
    rho: float = 0.5,
    q: float = 0.0,
) -> VerificationReport:
    """
    Gradient estimate at x0 with the 1/R^2 rate, valid when phi is a
    (c, R)-strong cut-off function on S centered at x0:

        ((1-rho) Gamma(sqrt u)/u - d_t sqrt(u)/sqrt(u) - q/2)(t, x0)
            <= n/(2(1-rho)t)
               + D_m c n/(2(1-rho)R^2) (1 + R sqrt K + n (D_mu+1)^2 / (4 rho (1-rho)))
               + K n / (2 rho)

    A rejected cut-off makes the estimate inapplicable: the report carries
    no inequality entries and status "cutoff rejected".
    """
    times = _positive_times(t_grid)
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    n, K = cert.dimension_n, effective_K(cert)
    consts = structural_constants(g)
    cutoff = verify_strong_cutoff(g, phi, x0, S, c, R, K)

    report = VerificationReport(
        check="li-yau-strong",
        params={
            "x0": x0, "c": c, "R": R, "n": n, "K": K, "rho": rho, "q": q,
            "D_m": consts.D_m, "D_mu": consts.D_mu,
            "certificate_status": cert.status,
        },
        grid={"t": times},
    )
    report.extra["cutoff"] = cutoff.to_dict()
    if not cutoff.passed:
        report.status = STATUS_CUTOFF_REJECTED
        report.notes.append(f"strong cut-off rejected at {[e.label for e in cutoff.failures]}")
        return report

    u = _solution(g, None, u0, times, q)
    _require_positive(u, ball(g, x0, 1), times)
    i = g.index(x0)
    cutoff_term = (
        consts.D_m * c * n / (2.0 * (1.0 - rho) * R * R)
        * (1.0 + R * math.sqrt(K) + n * (consts.D_mu + 1.0) ** 2 / (4.0 * rho * (1.0 - rho)))
    )
    for row, t in enumerate(times):
        gradient, time_term = _li_yau_terms(g, u[row], q)
        lhs = (1.0 - rho) * gradient[i] - time_term[i] - 0.5 * q
        rhs = n / (2.0 * (1.0 - rho) * t) + cutoff_term + _kn(K, n) / (2.0 * rho)
        report.add(f"t={t:g}", lhs=float(lhs), rhs=rhs, t=t)
    return _conditional_status(report)


@dataclass(frozen=True)
class HarnackParams:
    n: float
    K: float
    q: float = 0.0
    rho: float = 0.5
    T1: float = 1.0
    T2: float = 2.0

    def __post_init__(self) -> None:
        if not self.n > 0:
            raise ValueError(f"n must be positive, got {self.n!r}")
        if not self.K >= 0:
            raise ValueError(f"K must be nonnegative, got {self.K!r}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho!r}")
        if not (self.T1 > 0 and self.T2 > 0):
            raise ValueError("T1 and T2 must be positive")
        if self.T1 > self.T2:
            raise ValueError(f"need T1 <= T2, got T1={self.T1!r} > T2={self.T2!r}")

    @classmethod
    def from_certificate(
        cls,
        cert: CurvatureCertificate,
        q: float = 0.0,
        rho: float = 0.5,
        T1: float = 1.0,
        T2: float = 2.0,
    ) -> "HarnackParams":
        return cls(n=cert.dimension_n, K=effective_K(cert), q=q, rho=rho, T1=T1, T2=T2)


def harnack_log_factor(params: HarnackParams, d: int, m_max: float, mu_min: float) -> float:
    """
    log of (T2/T1)^{n/(1-rho)} exp((K n/rho + q)(T2 - T1) + 4 m_max d^2 / ((1-rho)(T2-T1) mu_min)).

    At T1 = T2 the distance term is +inf for d > 0 and 0 for d = 0.
    """
    p = params
    span = p.T2 - p.T1
    value = p.n / (1.0 - p.rho) * math.log(p.T2 / p.T1) + (_kn(p.K, p.n) / p.rho + p.q) * span
    if d == 0:
        return value
    if span == 0:
        return math.inf
    return value + 4.0 * m_max * d * d / ((1.0 - p.rho) * span * mu_min)


def harnack_check(
    g: MeasuredGraph,
    params: HarnackParams,
    u0: FunctionLike,
    pairs: Sequence[Tuple[str, str]],
) -> VerificationReport:
    """u(T1, x) <= u(T2, y) times the Harnack factor, u = e^{-qt} P_t u0."""
    values = _values(g, u0)
    if np.any(values < 0) or not np.any(values > 0):
        raise ValueError("initial datum must be nonnegative and not identically 0")
    if not pairs:
        raise ValueError("no vertex pairs given")
    consts = structural_constants(g)
    u = _solution(g, None, values, [params.T1, params.T2], params.q)

    report = VerificationReport(
        check="harnack",
        params={
            "n": params.n, "K": params.K, "q": params.q, "rho": params.rho,
            "T1": params.T1, "T2": params.T2,
            "m_max": consts.m_max, "mu_min": consts.mu_min,
        },
    )
    for x, y in pairs:
        d = distance(g, x, g.subset([y]))
        lhs = float(u[0, g.index(x)])
        later = float(u[1, g.index(y)])
        if later <= 0:
            raise ValueError(f"heat solution is not positive at {y!r}, T2={params.T2!r}")
        try:
            rhs = later * math.exp(harnack_log_factor(params, d, consts.m_max, consts.mu_min))
        except OverflowError:
            rhs = math.inf
        report.add(f"{x}->{y}", lhs=lhs, rhs=rhs, x=x, y=y, d=d)
    return _conditional_status(report)


# ======================================================================
# Cheng's bound on the spectral bottom
# ======================================================================

def _extrapolate_bottom(radii: Sequence[int], mu1: Sequence[float]) -> float:
    """Least-squares mu in mu_1(r) ~ mu + b / (r + 1)^2."""
    x = 1.0 / (np.asarray(radii, dtype=float) + 1.0) ** 2
    A = np.column_stack([np.ones_like(x), x])
    coeffs, *_ = np.linalg.lstsq(A, np.asarray(mu1, dtype=float), rcond=None)
    return float(coeffs[0])


def cheng_check(
    ex: Exhaustion,
    cert: CurvatureCertificate,
    stages: Optional[int] = None,
) -> VerificationReport:
    """
    Spectral bottom mu of the infinite graph against K n.

    mu is estimated from the first Dirichlet eigenvalues of the exhaustion
    stages, which must be nonincreasing; the extrapolated limit is clamped to
    [0, last mu_1].
    """
    count = len(ex.stages) if stages is None else int(stages)
    if count < 3 or count > len(ex.stages):
        raise ValueError(f"cheng_check needs 3..{len(ex.stages)} stages, got {count}")

    tol = get_tolerance("monotonicity")
    radii = list(ex.radii[:count])
    sequence: List[float] = []
    for radius, stage in zip(radii, ex.stages[:count]):
        mu1 = dirichlet_spectrum(ex.host, stage).mu1
        if sequence and mu1 > sequence[-1] + tol:
            raise MonotonicityError(
                f"mu_1 rose from {sequence[-1]:.17g} to {mu1:.17g} at stage radius {radius}"
            )
        sequence.append(mu1)
        logger.debug("cheng stage r=%d |Omega|=%d mu1=%.12g", radius, len(stage), mu1)

    extrapolated = min(max(_extrapolate_bottom(radii, sequence), 0.0), sequence[-1])
    n, K = cert.dimension_n, effective_K(cert)
    report = VerificationReport(
        check="cheng",
        params={
            "family": ex.family, "parameter": ex.parameter, "n": n, "K": K,
            "mu1_sequence": sequence, "mu_last": sequence[-1],
            "mu_extrapolated": extrapolated,
            "certificate_status": cert.status,
        },
        grid={"radii": radii},
    )
    report.add(
        "mu <= K n",
        lhs=extrapolated,
        rhs=_kn(K, n),
        passed=extrapolated <= _kn(K, n) + get_tolerance("cheng"),
    )
    return _conditional_status(report)


# ======================================================================
# Gaussian upper bound constants
# ======================================================================

@dataclass(frozen=True)
class GaussianFit:
    """
    Constants of p_t(x, y) <= C1 e^{-(1-gamma) mu t} / sqrt(m(B_x) m(B_y))
    exp(-C3 d^2 / (4(1+2 eps) t) + C2 sqrt(K n t)), balls of hop radius
    floor(sqrt t). C1_fitted and C2 are the first frontier point.
    """
    gamma: float
    epsilon: float
    beta: float
    C1_fitted: float
    C2: float
    C3: float
    K: float
    n: float
    mu: float
    frontier: Tuple[Tuple[float, float], ...]
    grid: Dict[str, Any]

    def as_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "C1": self.C1_fitted,
            "C2": self.C2,
            "C3": self.C3,
            "K": self.K,
            "n": self.n,
            "mu": self.mu,
            "frontier": [list(p) for p in self.frontier],
            "grid": self.grid,
        }


def all_pairs_sample(g: MeasuredGraph, times: Sequence[float]) -> List[Tuple[str, str, float]]:
    """Every ordered pair x <= y (graph order) at every time."""
    return [
        (g.vertices[i], g.vertices[j], float(t))
        for t in times
        for i in range(len(g))
        for j in range(i, len(g))
    ]


def _exp_or_inf(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _hop_radius(t: float) -> int:
    return int(math.floor(math.sqrt(t) + 1e-12))


def gaussian_fit(
    g: MeasuredGraph,
    cert: CurvatureCertificate,
    gamma: float,
    epsilon: float,
    beta: float,
    C2_grid: Sequence[float],
    sample: Sequence[Tuple[str, str, float]],
) -> GaussianFit:
    """
    Smallest C1 making the Gaussian bound hold on the admissible part of
    the sample (t >= max(beta d, 1)), for every C2 in the grid. mu is 0 on
    a finite connected graph; C3 is the corollary constant for (gamma, beta, D_m).
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    C2_values = sorted(float(c) for c in C2_grid)
    if not C2_values or C2_values[0] < 0:
        raise ValueError("C2 grid must be nonempty and nonnegative")
    params = DggParams.for_graph(g, gamma, beta)
    C3 = corollary_constant(params)
    n, K = cert.dimension_n, effective_K(cert)
    mu = 0.0

    admissible: List[Tuple[str, str, float, int]] = []
    for x, y, t in sample:
        d = distance(g, x, g.subset([y]))
        if t >= max(beta * d, 1.0):
            admissible.append((x, y, float(t), d))
        else:
            logger.debug("gaussian fit: (%s, %s, t=%g) outside regime", x, y, t)
    if not admissible:
        raise RegimeError("no sample point satisfies t >= max(beta d, 1)")

    times = sorted({t for _, _, t, _ in admissible})
    kernels = {k.time: k for k in heat_kernels(g, None, times)}
    ball_mass: Dict[Tuple[str, int], float] = {}

    def mass(x: str, r: int) -> float:
        key = (x, r)
        if key not in ball_mass:
            ball_mass[key] = measure_of(g, ball(g, x, r))
        return ball_mass[key]

    # entries this far below the kernel's largest one are eigensolver round-off
    floor = get_tolerance("kernel_floor")
    peaks = {t: float(np.max(k.values)) for t, k in kernels.items()}

    # log of p_t sqrt(m(B_x) m(B_y)) e^{(1-gamma) mu t} e^{C3 d^2 / (4(1+2 eps) t)},
    # and the coefficient sqrt(K n t) multiplying C2
    logs: List[float] = []
    slopes: List[float] = []
    below_floor = 0
    for x, y, t, d in admissible:
        p = kernels[t].entry(x, y)
        if p <= floor * peaks[t]:
            below_floor += 1
            continue
        r = _hop_radius(t)
        logs.append(
            math.log(p)
            + 0.5 * math.log(mass(x, r) * mass(y, r))
            + (1.0 - gamma) * mu * t
            + C3 * d * d / (4.0 * (1.0 + 2.0 * epsilon) * t)
        )
        slopes.append(math.sqrt(_kn(K, n) * t))
    if below_floor:
        logger.debug("gaussian fit: %d sample points at round-off level, not fitted", below_floor)
    if not logs:
        raise RegimeError("every admissible sample point is at round-off level")
    log_arr, slope_arr = np.asarray(logs), np.asarray(slopes)

    frontier = tuple(
        (c2, _exp_or_inf(float(np.max(log_arr - c2 * slope_arr)))) for c2 in C2_values
    )
    if math.isinf(frontier[0][1]):
        logger.warning("gaussian fit: C1 overflows a float at C2=%g", frontier[0][0])
    return GaussianFit(
        gamma=float(gamma),
        epsilon=float(epsilon),
        beta=float(beta),
        C1_fitted=frontier[0][1],
        C2=frontier[0][0],
        C3=C3,
        K=K,
        n=n,
        mu=mu,
        frontier=frontier,
        grid={"times": times, "points": len(admissible), "below_floor": below_floor, "C2": C2_values},
    )


def finite_mixing_check(
    g: MeasuredGraph,
    fit: GaussianFit,
    t_grid: Sequence[float],
) -> VerificationReport:
    """
    |p_t(x, y) - 1/V| <= (1/V)(C1 e^{C2 sqrt(K n) D} - 1) e^{lambda_2 D^2 - lambda_2 t}
    for grid times t >= D^2, using a fitted (C1, C2).

    The on-diagonal Gaussian bound at t = D^2 that the estimate starts from
    is checked as well ("start x=...").
    """
    D = diameter(g)
    volume = g.total_measure
    lam2 = dirichlet_spectrum(g).spectral_gap
    start = D * D
    amplitude = (fit.C1_fitted * math.exp(fit.C2 * math.sqrt(_kn(fit.K, fit.n)) * D) - 1.0) / volume
    tol = get_tolerance("mixing")
    times = sorted(float(t) for t in t_grid)

    report = VerificationReport(
        check="finite-mixing",
        params={
            "diameter": D, "volume": volume, "lambda_2": lam2,
            "C1": fit.C1_fitted, "C2": fit.C2, "K": fit.K, "n": fit.n,
        },
        grid={"t": times},
    )
    start_kernel = heat_kernels(g, None, [start])[0]
    start_bound = fit.C1_fitted * math.exp(fit.C2 * math.sqrt(_kn(fit.K, fit.n)) * D) / volume
    for x in g.vertices:
        report.add(
            f"start x={x}",
            lhs=start_kernel.entry(x, x),
            rhs=start_bound,
            passed=start_bound - start_kernel.entry(x, x) >= -tol * start_bound,
            t=start,
            vertex=x,
        )

    skipped = [t for t in times if t < start]
    for t in (t for t in times if t >= start):
        tail, _ = _spectral_tail(g, t)
        deviation = float(np.max(np.abs(tail))) * math.exp(-lam2 * t)
        rhs = amplitude * math.exp(lam2 * (start - t))
        report.add(
            f"t={t:g}",
            lhs=deviation,
            rhs=rhs,
            passed=rhs - deviation >= -tol * max(rhs, 1e-300),
            t=t,
        )
    if skipped:
        report.notes.append(f"t < D^2 = {start}, skipped t = {skipped}")
    return report
