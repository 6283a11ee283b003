"""
dggkit.operators

The Laplacian, the gradient forms Gamma and Gamma_2, Dirichlet restrictions,
spectra and Rayleigh quotients on a MeasuredGraph.

Conventions:
    Delta f(x)    = (1/m(x)) sum_y mu_xy (f(y) - f(x))
    Gamma(f,h)(x) = (1/(2 m(x))) sum_y mu_xy (f(y)-f(x)) (h(y)-h(x))
    Gamma_2(f)(x) = 1/2 Delta Gamma(f,f)(x) - Gamma(f, Delta f)(x)

Spectra are eigen-decompositions of -Delta_Omega (values outside Omega pinned
to 0), computed on the measure-symmetrized matrix and un-conjugated after.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from .config import get_max_dense_vertices, get_tolerance
from .graph_core import MeasuredGraph, Subset, SubsetLike, as_subset, ball, distances_from

logger = logging.getLogger(__name__)


class SpectrumError(RuntimeError):
    """Dense eigensolve failed, or the domain exceeds the dense-size cap."""


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """Real function on every vertex of `parent`, stored in graph order."""
    parent: MeasuredGraph
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.parent),):
            raise ValueError(
                f"vertex function needs {len(self.parent)} values, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(
        cls,
        g: MeasuredGraph,
        mapping: Mapping[str, float],
        default: float = 0.0,
    ) -> "VertexFunction":
        """Values for listed vertices; `default` (implicit 0) elsewhere."""
        values = np.full(len(g), float(default))
        for v, value in mapping.items():
            values[g.index(v)] = float(value)
        return cls(g, values)

    @classmethod
    def constant(cls, g: MeasuredGraph, c: float) -> "VertexFunction":
        return cls(g, np.full(len(g), float(c)))

    @classmethod
    def indicator(cls, g: MeasuredGraph, B: SubsetLike) -> "VertexFunction":
        return cls(g, as_subset(g, B).mask().astype(float))

    def __call__(self, x: str) -> float:
        return float(self.values[self.parent.index(x)])

    def __len__(self) -> int:
        return len(self.values)

    def scaled(self, c: float) -> "VertexFunction":
        return VertexFunction(self.parent, c * self.values)

    def support(self) -> List[str]:
        return [self.parent.vertices[i] for i in np.flatnonzero(self.values)]

    def as_dict(self) -> Dict[str, float]:
        return {v: float(x) for v, x in zip(self.parent.vertices, self.values)}


FunctionLike = Union[VertexFunction, np.ndarray, Iterable[float]]


def _values(g: MeasuredGraph, f: FunctionLike) -> np.ndarray:
    if isinstance(f, VertexFunction):
        return f.values
    out = np.asarray(f, dtype=float)
    if out.shape != (len(g),):
        raise ValueError(f"expected {len(g)} values, got shape {out.shape}")
    return out


# ======================================================================
# Pointwise operators
# ======================================================================

def laplacian_values(g: MeasuredGraph, f: FunctionLike) -> np.ndarray:
    """Delta f at every vertex."""
    v = _values(g, f)
    return (g.weights @ v - g.degree * v) / g.measure


def gamma_values(g: MeasuredGraph, f: FunctionLike, h: FunctionLike) -> np.ndarray:
    """Gamma(f, h) at every vertex."""
    v = _values(g, f)
    w = _values(g, h)
    dv = v[None, :] - v[:, None]
    dw = w[None, :] - w[:, None]
    return (g.weights * dv * dw).sum(axis=1) / (2.0 * g.measure)


def laplacian(g: MeasuredGraph, f: FunctionLike, x: str) -> float:
    v = _values(g, f)
    i = g.index(x)
    return float((g.weights[i] @ (v - v[i])) / g.measure[i])


def gamma(g: MeasuredGraph, f: FunctionLike, h: FunctionLike, x: str) -> float:
    v = _values(g, f)
    w = _values(g, h)
    i = g.index(x)
    return float((g.weights[i] @ ((v - v[i]) * (w - w[i]))) / (2.0 * g.measure[i]))


def gamma2(g: MeasuredGraph, f: FunctionLike, x: str) -> float:
    """
    Gamma_2(f)(x). Only the values of f on the 2-ball of x enter; the caller
    must supply them (there is no implicit zero extension here).
    """
    patch = local_patch(g, x)
    return patch.forms(patch.restrict(_values(g, f))).gamma2


# ======================================================================
# Local 2-ball patch
# ======================================================================

class BakryEmeryTerms(NamedTuple):
    """All pointwise quantities the CD / CDE ratios need at the patch center."""
    laplacian: float
    gamma: float
    gamma2: float
    # Gamma(f, Gamma(f)/f)(x); nan when f is not positive on the patch
    gamma_quotient: float


@dataclass(frozen=True, eq=False)
class LocalPatch:
    """
    The 2-ball around `center` with the center at position 0.

    Rows of `inner` (the 1-ball) have all their neighbors inside the patch,
    so Delta and Gamma evaluated there agree with the whole graph.
    """
    center: str
    vertices: Tuple[str, ...]
    graph_indices: np.ndarray
    weights: np.ndarray
    measure: np.ndarray
    degree: np.ndarray
    inner: np.ndarray

    def __len__(self) -> int:
        return len(self.vertices)

    def restrict(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float)[self.graph_indices]

    def extend(self, patch_values: np.ndarray, g: MeasuredGraph, fill: float = 0.0) -> np.ndarray:
        out = np.full(len(g), float(fill))
        out[self.graph_indices] = patch_values
        return out

    def _lap(self, v: np.ndarray, rows: np.ndarray) -> np.ndarray:
        return (self.weights[rows] @ v - self.degree[rows] * v[rows]) / self.measure[rows]

    def _gam(self, v: np.ndarray, w: np.ndarray, rows: np.ndarray) -> np.ndarray:
        dv = v[None, :] - v[rows, None]
        dw = w[None, :] - w[rows, None]
        return (self.weights[rows] * dv * dw).sum(axis=1) / (2.0 * self.measure[rows])

    def forms(self, v: np.ndarray) -> BakryEmeryTerms:
        center = np.array([0])
        inner = self.inner

        lap_inner = np.zeros(len(self))
        lap_inner[inner] = self._lap(v, inner)
        gam_inner = np.zeros(len(self))
        gam_inner[inner] = self._gam(v, v, inner)

        lap0 = float(lap_inner[0])
        gam0 = float(gam_inner[0])
        gamma2_0 = float(
            0.5 * self._lap(gam_inner, center)[0] - self._gam(v, lap_inner, center)[0]
        )

        quotient = float("nan")
        if np.all(v[inner] > 0):
            ratio = np.zeros(len(self))
            ratio[inner] = gam_inner[inner] / v[inner]
            quotient = float(self._gam(v, ratio, center)[0])
        return BakryEmeryTerms(lap0, gam0, gamma2_0, quotient)


def local_patch(g: MeasuredGraph, x: str) -> LocalPatch:
    key = ("patch", x)
    cached = g._cache.get(key)
    if cached is not None:
        return cached  # type: ignore[return-value]

    two_ball = ball(g, x, 2)
    centre_index = g.index(x)
    rest = [i for i in two_ball.indices if i != centre_index]
    idx = np.array([centre_index] + rest, dtype=int)
    dist = distances_from(g, g.subset([x]))[idx]

    patch = LocalPatch(
        center=x,
        vertices=tuple(g.vertices[i] for i in idx),
        graph_indices=idx,
        weights=g.weights[np.ix_(idx, idx)],
        measure=g.measure[idx],
        degree=g.degree[idx],
        inner=np.flatnonzero(dist <= 1),
    )
    g._cache[key] = patch
    return patch


# ======================================================================
# Dirichlet spectra
# ======================================================================

@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Eigenpairs of -Delta_Omega.

    eigenvalues:    nondecreasing, length |Omega|
    eigenvectors:   column k is phi_{k+1} restricted to Omega (domain order),
                    orthonormal in l2(Omega, m)
    """
    domain: Subset
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def mu1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def spectral_gap(self) -> float:
        """lambda_2, the smallest nontrivial eigenvalue (whole-graph spectra)."""
        if len(self.eigenvalues) < 2:
            raise SpectrumError("spectrum has a single eigenvalue")
        return float(self.eigenvalues[1])

    def eigenfunction(self, k: int) -> VertexFunction:
        """phi_k (1-based) as a VertexFunction with implicit 0 off Omega."""
        g = self.domain.parent
        values = np.zeros(len(g))
        values[self.domain.indices] = self.eigenvectors[:, k - 1]
        return VertexFunction(g, values)

    def eigenfunctions(self) -> List[VertexFunction]:
        return [self.eigenfunction(k) for k in range(1, len(self) + 1)]


def dirichlet_matrix(g: MeasuredGraph, Omega: SubsetLike) -> np.ndarray:
    """Matrix of -Delta_Omega on functions supported in Omega (domain order)."""
    idx = as_subset(g, Omega).indices
    W = g.weights[np.ix_(idx, idx)]
    return (np.diag(g.degree[idx]) - W) / g.measure[idx][:, None]


def _sign_normalize(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column made positive
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def spectrum_defects(g: MeasuredGraph, spectrum: Spectrum) -> Tuple[float, float]:
    """
    (orthonormality defect, eigen-residual) of a Spectrum:

        max |sum_x m(x) phi_i(x) phi_j(x) - delta_ij|
        max |(-Delta_Omega) phi_i - lambda_i phi_i| / max(1, |lambda_i|)
    """
    idx = spectrum.domain.indices
    m = g.measure[idx]
    phi = spectrum.eigenvectors
    gram = phi.T @ (m[:, None] * phi)
    orth = float(np.max(np.abs(gram - np.eye(len(spectrum)))))

    A = dirichlet_matrix(g, spectrum.domain)
    resid = A @ phi - phi * spectrum.eigenvalues[None, :]
    scale = np.maximum(1.0, np.abs(spectrum.eigenvalues))
    residual = float(np.max(np.abs(resid).max(axis=0) / scale))
    return orth, residual


def dirichlet_spectrum(g: MeasuredGraph, Omega: Optional[SubsetLike] = None) -> Spectrum:
    """
    Eigen-decomposition of -Delta_Omega; Omega defaults to the whole graph.

    Raises SpectrumError when |Omega| exceeds the dense cap or the solver's
    output fails the orthonormality / residual checks.
    """
    domain = g.whole() if Omega is None else as_subset(g, Omega)
    key = ("spectrum", domain.members)
    cached = g._cache.get(key)
    if cached is not None:
        return cached  # type: ignore[return-value]

    cap = get_max_dense_vertices()
    if len(domain) > cap:
        raise SpectrumError(
            f"domain has {len(domain)} vertices; dense solver cap is {cap}"
        )

    idx = domain.indices
    inv_sqrt_m = 1.0 / np.sqrt(g.measure[idx])
    W = g.weights[np.ix_(idx, idx)]
    sym = inv_sqrt_m[:, None] * (np.diag(g.degree[idx]) - W) * inv_sqrt_m[None, :]
    sym = 0.5 * (sym + sym.T)

    try:
        eigenvalues, vectors = scipy.linalg.eigh(sym)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SpectrumError(f"eigensolve failed on |Omega|={len(domain)}: {exc}") from exc

    phi = _sign_normalize(inv_sqrt_m[:, None] * vectors)
    eigenvalues.setflags(write=False)
    phi.setflags(write=False)
    spectrum = Spectrum(domain, eigenvalues, phi)

    tol = get_tolerance("eigen")
    orth, residual = spectrum_defects(g, spectrum)
    scale = max(1.0, float(np.max(g.degree[idx] / g.measure[idx])))
    if orth > tol * len(domain) or residual > tol * scale * len(domain):
        raise SpectrumError(
            f"eigensolve defects too large: orthonormality {orth:.3e}, residual {residual:.3e}"
        )

    logger.debug("spectrum on %d vertices: mu1=%.6g", len(domain), eigenvalues[0])
    g._cache[key] = spectrum
    return spectrum


def rayleigh_mu1(g: MeasuredGraph, Omega: SubsetLike, f: FunctionLike) -> float:
    """
    (1/2 sum_{x,y} mu_xy (f(x)-f(y))^2) / (sum_{x in Omega} m(x) f(x)^2)
    for f supported in Omega. The sum in the numerator runs over all of V,
    so edges leaving Omega contribute f(x)^2.
    """
    domain = as_subset(g, Omega)
    v = _values(g, f)
    outside = ~domain.mask()
    if np.any(v[outside] != 0):
        raise ValueError("test function is not supported in Omega")
    denominator = float(np.sum(g.measure * v * v))
    if denominator == 0:
        raise ValueError("zero denominator: test function vanishes on Omega")
    diff = v[:, None] - v[None, :]
    numerator = 0.5 * float(np.sum(g.weights * diff * diff))
    return numerator / denominator


def dirichlet_energy(g: MeasuredGraph, f: FunctionLike, h: FunctionLike) -> float:
    """1/2 sum_{x,y} mu_xy (f(y)-f(x))(h(y)-h(x))."""
    v = _values(g, f)
    w = _values(g, h)
    return 0.5 * float(np.sum(g.weights * (v[None, :] - v[:, None]) * (w[None, :] - w[:, None])))


def inner_product(g: MeasuredGraph, f: FunctionLike, h: FunctionLike) -> float:
    return float(np.sum(g.measure * _values(g, f) * _values(g, h)))
