"""
dggkit.curvature

Numerical evidence for CD(n, K) and CDE(n, K) at a vertex, plus strong
cut-off verification.

    CD ratio   (Gamma_2(f) - (Delta f)^2 / n) / Gamma(f)
    CDE ratio  (Gamma_2(f) - Gamma(f, Gamma(f)/f) - (Delta f)^2 / n) / Gamma(f)

A graph satisfies kind(n, K) at x iff K <= inf_f ratio(f). Every value found
by search is an upper estimate of that infimum; nothing here proves a lower
curvature bound.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .config import get_curvature_defaults, get_thread_limit, get_tolerance
from .graph_core import MeasuredGraph, SubsetLike, as_subset, structural_constants
from .operators import (
    BakryEmeryTerms, FunctionLike, LocalPatch, VertexFunction, _values,
    gamma_values, laplacian_values, local_patch,
)
from .report import VerificationReport

logger = logging.getLogger(__name__)

KIND_CD = "CD"
KIND_CDE = "CDE"
KINDS = (KIND_CD, KIND_CDE)

STATUS_CERTIFIED = "certified"
STATUS_INCONCLUSIVE = "inconclusive"

# admissibility: Delta f(x) must be below -this
ADMISSIBLE_LAPLACIAN = 1e-12
# Gamma(f)(x) below this is treated as degenerate
GAMMA_FLOOR = 1e-8
# search box for the free log-values (CDE) or values (CD)
CDE_BOX = 10.0
CD_BOX = 1.0
_PENALTY = 1e6
_START_ATTEMPTS = 1000


class AdmissibilityError(ValueError):
    """Test function outside the domain of the CD / CDE ratio."""


def _inverse_dimension(n: float) -> float:
    n = float(n)
    if not n > 0:
        raise ValueError(f"dimension must be positive, got {n!r}")
    return 0.0 if math.isinf(n) else 1.0 / n


def _cd_from_terms(terms: BakryEmeryTerms, inv_n: float) -> float:
    if terms.gamma <= 0:
        raise AdmissibilityError("Gamma(f)(x) = 0: ratio undefined")
    return (terms.gamma2 - inv_n * terms.laplacian ** 2) / terms.gamma


def _cde_from_terms(terms: BakryEmeryTerms, inv_n: float) -> float:
    if math.isnan(terms.gamma_quotient):
        raise AdmissibilityError("nonpositive test function on the 2-ball")
    if terms.laplacian >= 0:
        raise AdmissibilityError("not admissible: Delta f(x) >= 0")
    if terms.gamma <= 0:
        raise AdmissibilityError("Gamma(f)(x) = 0: ratio undefined")
    return (
        terms.gamma2 - terms.gamma_quotient - inv_n * terms.laplacian ** 2
    ) / terms.gamma


def cd_ratio(g: MeasuredGraph, f: FunctionLike, x: str, n: float = math.inf) -> float:
    patch = local_patch(g, x)
    return _cd_from_terms(patch.forms(patch.restrict(_values(g, f))), _inverse_dimension(n))


def cde_ratio(g: MeasuredGraph, f: FunctionLike, x: str, n: float = math.inf) -> float:
    """
    CDE ratio of a test function that is positive on the 2-ball of x with
    Delta f(x) < 0. Raises AdmissibilityError otherwise.
    """
    patch = local_patch(g, x)
    return _cde_from_terms(patch.forms(patch.restrict(_values(g, f))), _inverse_dimension(n))


# ======================================================================
# Certificates
# ======================================================================

@dataclass(frozen=True, eq=False)
class CurvatureCertificate:
    """
    Optimization evidence for kind(n, bound_K) at `vertex`.

    bound_K is the smallest ratio found, attained by `witness`. It is an
    upper estimate of the true infimum. status is "certified" when at least
    two restarts reproduce bound_K within the agreement tolerance.
    """
    vertex: str
    dimension_n: float
    bound_K: float
    kind: str
    witness: VertexFunction
    restarts: int
    status: str
    seed: int = 0
    margin: float = 0.0
    dispersion: float = 0.0
    agreeing: int = 0
    admissible_restarts: int = 0

    @property
    def supported_K(self) -> float:
        """bound_K - margin: the K the evidence is quoted for."""
        return self.bound_K - self.margin

    def to_dict(self) -> Dict[str, Any]:
        patch = local_patch(self.witness.parent, self.vertex)
        return {
            "vertex": self.vertex,
            "kind": self.kind,
            "n": self.dimension_n,
            "bound_K": self.bound_K,
            "supported_K": self.supported_K,
            "margin": self.margin,
            "status": self.status,
            "restarts": self.restarts,
            "admissible_restarts": self.admissible_restarts,
            "agreeing": self.agreeing,
            "dispersion": self.dispersion,
            "seed": self.seed,
            "witness": {v: self.witness(v) for v in patch.vertices},
        }


def ratio_from_witness(cert: CurvatureCertificate) -> float:
    """Re-evaluate the certificate's ratio on its stored witness."""
    g = cert.witness.parent
    if cert.kind == KIND_CDE:
        return cde_ratio(g, cert.witness, cert.vertex, cert.dimension_n)
    return cd_ratio(g, cert.witness, cert.vertex, cert.dimension_n)


def certificate_from_bound(
    g: MeasuredGraph,
    x: str,
    n: float,
    bound_K: float,
    kind: str = KIND_CDE,
) -> CurvatureCertificate:
    """
    A user-asserted (n, K) with no search behind it, for the conditional
    estimates. The witness is the constant 1 and status is "inconclusive".
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return CurvatureCertificate(
        vertex=x,
        dimension_n=float(n),
        bound_K=float(bound_K),
        kind=kind,
        witness=VertexFunction.constant(g, 1.0),
        restarts=0,
        status=STATUS_INCONCLUSIVE,
    )


class _Objective:
    """Ratio as a function of the free patch coordinates (center pinned)."""

    def __init__(self, patch: LocalPatch, kind: str, inv_n: float) -> None:
        self.patch = patch
        self.kind = kind
        self.inv_n = inv_n

    def values(self, w: np.ndarray) -> np.ndarray:
        if self.kind == KIND_CDE:
            return np.exp(np.concatenate(([0.0], w)))
        return np.concatenate(([0.0], w))

    def ratio(self, w: np.ndarray) -> Optional[float]:
        """The ratio, or None outside the admissible region."""
        terms = self.patch.forms(self.values(w))
        if terms.gamma <= GAMMA_FLOOR:
            return None
        if self.kind == KIND_CDE:
            if terms.laplacian >= -ADMISSIBLE_LAPLACIAN:
                return None
            return _cde_from_terms(terms, self.inv_n)
        return _cd_from_terms(terms, self.inv_n)

    def __call__(self, w: np.ndarray) -> float:
        value = self.ratio(w)
        if value is None or not math.isfinite(value):
            terms = self.patch.forms(self.values(w))
            # grows with the violation so the simplex is pushed back
            return _PENALTY * (1.0 + max(terms.laplacian, 0.0) + max(GAMMA_FLOOR - terms.gamma, 0.0))
        return value


def _starting_points(
    objective: _Objective,
    dimension: int,
    restarts: int,
    rng: np.random.Generator,
    box: float,
) -> List[np.ndarray]:
    starts: List[np.ndarray] = []
    attempts = 0
    while len(starts) < restarts:
        if attempts >= _START_ATTEMPTS * restarts:
            break
        attempts += 1
        w = rng.uniform(-0.5 * box, 0.5 * box, size=dimension)
        if objective.ratio(w) is not None:
            starts.append(w)
    if not starts:
        raise AdmissibilityError(
            f"no admissible starting point at {objective.patch.center!r} "
            f"after {attempts} samples"
        )
    return starts


def _local_search(
    objective: _Objective,
    start: np.ndarray,
    box: float,
    max_evaluations: int,
) -> Tuple[Optional[float], np.ndarray]:
    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        bounds=[(-box, box)] * len(start),
        options={
            "maxfev": max_evaluations,
            "xatol": 1e-10,
            "fatol": 1e-13,
            "adaptive": True,
        },
    )
    candidates = [(objective.ratio(result.x), result.x), (objective.ratio(start), start)]
    admissible = [(v, w) for v, w in candidates if v is not None and math.isfinite(v)]
    if not admissible:
        return None, start
    return min(admissible, key=lambda item: item[0])


def estimate_curvature(
    g: MeasuredGraph,
    x: str,
    n: float = math.inf,
    kind: str = KIND_CDE,
    restarts: Optional[int] = None,
    seed: int = 0,
    max_evaluations: Optional[int] = None,
) -> CurvatureCertificate:
    """
    Multi-start Nelder-Mead minimization of the CD / CDE ratio over test
    functions on the 2-ball of x, normalized at x.

    CDE searches f = exp(w) with w(x) = 0 and w in [-10, 10] elsewhere;
    Delta f(x) >= -1e-12 is rejected. CD searches f = w with w(x) = 0 and
    w in [-1, 1] (the CD ratio ignores constants and scale). Starting points
    are drawn from numpy's default_rng(seed) before any work is dispatched,
    so results do not depend on the thread count.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    defaults = get_curvature_defaults()
    restarts = defaults["restarts"] if restarts is None else int(restarts)
    max_evaluations = (
        defaults["max_evaluations"] if max_evaluations is None else int(max_evaluations)
    )
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    patch = local_patch(g, x)
    objective = _Objective(patch, kind, _inverse_dimension(n))
    box = CDE_BOX if kind == KIND_CDE else CD_BOX
    rng = np.random.default_rng(seed)
    starts = _starting_points(objective, len(patch) - 1, restarts, rng, box)

    def run(start: np.ndarray) -> Tuple[Optional[float], np.ndarray]:
        return _local_search(objective, start, box, max_evaluations)

    workers = min(get_thread_limit(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    best_index = -1
    best_value = math.inf
    values: List[float] = []
    for i, (value, _) in enumerate(results):
        if value is None:
            continue
        values.append(value)
        # strict < keeps the lowest restart index on ties
        if value < best_value:
            best_value, best_index = value, i
        logger.debug("restart %d at %s: %.12g", i, x, value)
    if best_index < 0:
        raise AdmissibilityError(f"every restart left the admissible region at {x!r}")

    agreement = get_tolerance("curvature_agreement")
    agreeing = sum(
        1 for v in values if abs(v - best_value) <= agreement * max(1.0, abs(best_value))
    )
    status = STATUS_CERTIFIED if agreeing >= 2 else STATUS_INCONCLUSIVE
    if status == STATUS_INCONCLUSIVE:
        logger.warning(
            "curvature at %s inconclusive: best %.6g reproduced by %d restart(s)",
            x, best_value, agreeing,
        )

    fill = 1.0 if kind == KIND_CDE else 0.0
    witness = VertexFunction(
        g, patch.extend(objective.values(results[best_index][1]), g, fill=fill)
    )
    return CurvatureCertificate(
        vertex=x,
        dimension_n=float(n),
        bound_K=float(best_value),
        kind=kind,
        witness=witness,
        restarts=restarts,
        status=status,
        seed=int(seed),
        margin=get_tolerance("curvature_margin"),
        dispersion=float(np.std(values)) if len(values) > 1 else 0.0,
        agreeing=agreeing,
        admissible_restarts=len(values),
    )


# ======================================================================
# Strong cut-off functions
# ======================================================================

def verify_strong_cutoff(
    g: MeasuredGraph,
    phi: FunctionLike,
    x0: str,
    S: SubsetLike,
    c: float,
    R: float,
    K: float = 0.0,
) -> VerificationReport:
    """
    Check that phi is a (c, R)-strong cut-off function centered at x0 and
    supported on S, for curvature CDE(n, -K):

        phi(x0) = 1, phi = 0 off S, and for every x in S either
        (1) phi(x) < c (1 + R sqrt K) / (2 R^2), or
        (2) phi > 0 on x and its neighbors, and
              phi^2(x) Delta(1/phi)(x) <= D_m c (1 + R sqrt K) / R^2,
              phi^3(x) Gamma(1/phi)(x) <= D_m c / R^2.

    Each vertex entry records which clause held ("1", "2" or "none").
    """
    values = _values(g, phi)
    if np.any(values < 0) or np.any(values > 1):
        raise ValueError("cut-off function must map into [0, 1]")
    if c <= 0 or R <= 0 or K < 0:
        raise ValueError("need c > 0, R > 0 and K >= 0")
    support = as_subset(g, S)
    D_m = structural_constants(g).D_m
    growth = 1.0 + R * math.sqrt(K)
    clause1_bound = c * growth / (2.0 * R * R)
    laplacian_bound = D_m * c * growth / (R * R)
    gamma_bound = D_m * c / (R * R)

    report = VerificationReport(
        check="strong-cutoff",
        params={"x0": x0, "c": c, "R": R, "K": K, "D_m": D_m, "support_size": len(support)},
    )
    deviation = abs(float(values[g.index(x0)]) - 1.0)
    report.add("phi(x0) = 1", lhs=deviation, rhs=0.0, passed=deviation <= 1e-12)
    outside = values[~support.mask()]
    report.add("phi = 0 off S", lhs=float(np.max(outside, initial=0.0)), rhs=0.0)

    positive = values > 0
    nonvanishing = np.array([
        positive[i] and all(positive[j] for j in np.flatnonzero(g.weights[i]))
        for i in range(len(g))
    ])
    # 1/phi where phi > 0; only read at nonvanishing vertices
    inverse = np.divide(1.0, values, out=np.zeros(len(g)), where=positive)
    lap_inverse = laplacian_values(g, inverse)
    gam_inverse = gamma_values(g, inverse, inverse)

    for x in support.ordered:
        i = g.index(x)
        v = float(values[i])
        if v < clause1_bound:
            report.add(f"x={x}", lhs=v, rhs=clause1_bound, passed=True, clause="1", vertex=x)
            continue
        if nonvanishing[i]:
            lap_term = v * v * float(lap_inverse[i])
            gam_term = v ** 3 * float(gam_inverse[i])
            margin_lap = laplacian_bound - lap_term
            margin_gam = gamma_bound - gam_term
            if margin_lap >= 0 and margin_gam >= 0:
                lhs, rhs = (lap_term, laplacian_bound) if margin_lap <= margin_gam else (gam_term, gamma_bound)
                report.add(f"x={x}", lhs=lhs, rhs=rhs, passed=True, clause="2", vertex=x)
                continue
            lhs, rhs = (lap_term, laplacian_bound) if margin_lap < margin_gam else (gam_term, gamma_bound)
            report.add(f"x={x}", lhs=lhs, rhs=rhs, passed=False, clause="none", vertex=x)
            continue
        report.add(f"x={x}", lhs=v, rhs=clause1_bound, passed=False, clause="none", vertex=x)
    return report


def clause_table(report: VerificationReport) -> Dict[str, str]:
    """vertex -> clause ("1", "2" or "none") from a strong cut-off report."""
    return {
        e.context["vertex"]: e.context["clause"]
        for e in report.entries
        if "vertex" in e.context
    }
