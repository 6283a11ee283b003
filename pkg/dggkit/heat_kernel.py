"""
dggkit.heat_kernel

Dirichlet heat kernels via spectral expansion, heat semigroup evolution and
minimal heat kernels via exhaustion.

    p_t(x, y, Omega) = sum_k exp(-lambda_k t) phi_k(x) phi_k(y)
    u(t, x)          = sum_{y in Omega} p_t(x, y, Omega) f(y) m(y)
"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .config import get_tolerance
from .graph_core import Exhaustion, GraphError, MeasuredGraph, Subset, SubsetLike, as_subset
from .operators import FunctionLike, Spectrum, VertexFunction, _values, dirichlet_spectrum

logger = logging.getLogger(__name__)


class MonotonicityError(RuntimeError):
    """A sequence that must be monotone across exhaustion stages is not."""


@dataclass(frozen=True, eq=False)
class HeatKernel:
    """
    p_t(x, y) on `domain` at a fixed time. `values` is indexed in domain
    order (graph order restricted to the domain); units are 1/measure.
    """
    time: float
    domain: Subset
    values: np.ndarray = field(repr=False)

    def _position(self, x: str) -> Optional[int]:
        if x not in self.domain.parent:
            raise GraphError(f"unknown vertex {x!r}")
        if x not in self.domain:
            return None
        i = self.domain.parent.index(x)
        return int(np.searchsorted(self.domain.indices, i))

    def entry(self, x: str, y: str) -> float:
        """p_t(x, y); 0 when either vertex lies outside the domain."""
        i, j = self._position(x), self._position(y)
        if i is None or j is None:
            return 0.0
        return float(self.values[i, j])

    def row_sums(self) -> np.ndarray:
        """sum_y p_t(x, y) m(y) for every x in the domain."""
        m = self.domain.parent.measure[self.domain.indices]
        return self.values @ m

    def block_mass(self, B1: SubsetLike, B2: SubsetLike) -> float:
        """sum_{x in B1} sum_{y in B2} p_t(x, y) m(x) m(y)."""
        g = self.domain.parent
        mask = self.domain.mask()
        weights1 = np.where(as_subset(g, B1).mask() & mask, g.measure, 0.0)[self.domain.indices]
        weights2 = np.where(as_subset(g, B2).mask() & mask, g.measure, 0.0)[self.domain.indices]
        return float(weights1 @ self.values @ weights2)


def _domain(g: MeasuredGraph, Omega: Optional[SubsetLike]) -> Subset:
    return g.whole() if Omega is None else as_subset(g, Omega)


def _check_time(t: float) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"time must be a finite nonnegative number, got {t!r}")
    return t


def kernel_from_spectrum(spectrum: Spectrum, t: float) -> HeatKernel:
    t = _check_time(t)
    phi = spectrum.eigenvectors
    decay = np.exp(-spectrum.eigenvalues * t)
    values = (phi * decay[None, :]) @ phi.T
    values = 0.5 * (values + values.T)
    values.setflags(write=False)
    return HeatKernel(t, spectrum.domain, values)


def dirichlet_heat_kernel(
    g: MeasuredGraph,
    Omega: Optional[SubsetLike],
    t: float,
) -> HeatKernel:
    """Dirichlet heat kernel on Omega (whole graph when Omega is None)."""
    return kernel_from_spectrum(dirichlet_spectrum(g, _domain(g, Omega)), t)


def heat_kernels(
    g: MeasuredGraph,
    Omega: Optional[SubsetLike],
    times: Sequence[float],
) -> List[HeatKernel]:
    spectrum = dirichlet_spectrum(g, _domain(g, Omega))
    return [kernel_from_spectrum(spectrum, t) for t in times]


def _evolve_matrix(
    g: MeasuredGraph,
    domain: Subset,
    f0: FunctionLike,
    times: Sequence[float],
) -> np.ndarray:
    values = _values(g, f0)
    if np.any(values[~domain.mask()] != 0):
        raise ValueError("initial datum is not supported in Omega")

    spectrum = dirichlet_spectrum(g, domain)
    idx = domain.indices
    phi = spectrum.eigenvectors
    coefficients = phi.T @ (g.measure[idx] * values[idx])

    out = np.zeros((len(times), len(g)))
    for row, t in enumerate(times):
        decay = np.exp(-spectrum.eigenvalues * _check_time(t))
        out[row, idx] = phi @ (decay * coefficients)
    return out


def heat_evolve(
    g: MeasuredGraph,
    Omega: Optional[SubsetLike],
    f0: FunctionLike,
    t: float,
) -> VertexFunction:
    """u(t, .) = P_t^Omega f0, zero off Omega."""
    return VertexFunction(g, _evolve_matrix(g, _domain(g, Omega), f0, [t])[0])


def heat_evolve_grid(
    g: MeasuredGraph,
    Omega: Optional[SubsetLike],
    f0: FunctionLike,
    times: Sequence[float],
) -> np.ndarray:
    """Rows u(t_i, .) for every grid time, in graph order."""
    return _evolve_matrix(g, _domain(g, Omega), f0, times)


class MinimalKernelResult(NamedTuple):
    value: float
    stage_values: List[float]
    radii: List[int]
    converged: bool


def minimal_heat_kernel(
    ex: Exhaustion,
    x: str,
    y: str,
    t: float,
    stages: Optional[int] = None,
) -> MinimalKernelResult:
    """
    p_t(x, y) on the infinite graph as the limit of p_t(x, y, Omega_i).

    The stage sequence must be nondecreasing; a drop larger than the
    monotonicity tolerance raises MonotonicityError. `converged` is True when
    the last two stages differ by less than the convergence tolerance.
    """
    count = len(ex.stages) if stages is None else int(stages)
    if count < 2 or count > len(ex.stages):
        raise ValueError(f"stages must be in [2, {len(ex.stages)}], got {count}")
    first = ex.stages[0]
    for v in (x, y):
        if v not in first:
            raise GraphError(f"vertex {v!r} is not in the first exhaustion stage")

    tol = get_tolerance("monotonicity")
    stage_values: List[float] = []
    for radius, stage in zip(ex.radii[:count], ex.stages[:count]):
        value = dirichlet_heat_kernel(ex.host, stage, t).entry(x, y)
        if stage_values and value < stage_values[-1] - tol:
            raise MonotonicityError(
                f"p_t({x},{y}) dropped from {stage_values[-1]:.17g} to {value:.17g} "
                f"at stage radius {radius}"
            )
        stage_values.append(value)
        logger.debug("minimal kernel stage r=%d |Omega|=%d value=%.17g",
                     radius, len(stage), value)

    converged = abs(stage_values[-1] - stage_values[-2]) < get_tolerance("convergence")
    return MinimalKernelResult(
        value=stage_values[-1],
        stage_values=stage_values,
        radii=list(ex.radii[:count]),
        converged=converged,
    )
