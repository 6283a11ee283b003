# tests/test_operators.py

import math

import numpy as np
import pytest

from dggkit.graph_core import ball, generate, load_graph
from dggkit.operators import (
    VertexFunction, dirichlet_energy, dirichlet_matrix, dirichlet_spectrum, gamma,
    gamma2, gamma_values, inner_product, laplacian, laplacian_values, local_patch,
    rayleigh_mu1, spectrum_defects,
)


def _weighted_path():
    return load_graph("""{
        "vertices": [{"id": "a", "m": 0.5}, {"id": "b", "m": 2.0},
                     {"id": "c", "m": 1.0}, {"id": "d", "m": 3.0}],
        "edges": [{"u": "a", "v": "b", "mu": 1.0}, {"u": "b", "v": "c", "mu": 0.25},
                  {"u": "c", "v": "d", "mu": 4.0}, {"u": "a", "v": "c", "mu": 2.0}]
    }""")


def _brute_gamma2(g, f, x):
    lap = laplacian_values(g, f)
    gam = gamma_values(g, f, f)
    return 0.5 * laplacian(g, gam, x) - gamma(g, f, lap, x)


# ----------------------------------------------------------------------
# Pointwise operators
# ----------------------------------------------------------------------

def test_laplacian_and_gamma_on_path():
    g = generate("path:3")
    f = [0.0, 1.0, 4.0]
    assert laplacian(g, f, "1") == pytest.approx(2.0)
    assert gamma(g, f, f, "1") == pytest.approx(5.0)
    assert list(laplacian_values(g, f)) == pytest.approx([1.0, 2.0, -3.0])


def test_constants_are_annihilated():
    g = _weighted_path()
    one = VertexFunction.constant(g, 3.0)
    assert np.allclose(laplacian_values(g, one), 0.0)
    assert np.allclose(gamma_values(g, one, one), 0.0)


def test_measure_scales_the_laplacian():
    g = _weighted_path()
    f = [1.0, -2.0, 0.5, 3.0]
    # Delta f(a) = (1 (-2 - 1) + 2 (0.5 - 1)) / 0.5
    assert laplacian(g, f, "a") == pytest.approx(-8.0)


def test_gamma2_on_two_vertices():
    g = generate("path:2")
    assert gamma2(g, [0.0, 1.0], "0") == pytest.approx(1.0)


@pytest.mark.parametrize("x", ["0,0", "1,0", "3,0", "1,-2"])
def test_gamma2_matches_whole_graph_formula(x):
    g = generate("lattice:2,3")
    f = np.random.default_rng(7).normal(size=len(g))
    assert gamma2(g, f, x) == pytest.approx(_brute_gamma2(g, f, x), abs=1e-10)


def test_gamma2_on_weighted_graph():
    g = _weighted_path()
    f = [0.3, -1.0, 2.0, 0.7]
    for x in g.vertices:
        assert gamma2(g, f, x) == pytest.approx(_brute_gamma2(g, f, x), abs=1e-10)


def test_local_patch_puts_center_first():
    g = generate("path:7")
    patch = local_patch(g, "3")
    assert patch.vertices[0] == "3"
    assert set(patch.vertices) == {"1", "2", "3", "4", "5"}
    assert len(patch.inner) == 3


def test_green_formula():
    g = _weighted_path()
    f = np.array([1.0, 0.0, -1.0, 2.0])
    h = np.array([0.5, 2.0, 1.0, -1.0])
    assert inner_product(g, laplacian_values(g, f), h) == pytest.approx(-dirichlet_energy(g, f, h))


def test_vertex_function_shape_and_mapping():
    g = generate("path:3")
    with pytest.raises(ValueError):
        VertexFunction(g, [1.0, 2.0])
    f = VertexFunction.from_mapping(g, {"2": 5.0})
    assert f("2") == 5.0
    assert f.support() == ["2"]
    assert VertexFunction.indicator(g, ["0", "1"]).as_dict() == {"0": 1.0, "1": 1.0, "2": 0.0}


# ----------------------------------------------------------------------
# Spectra
# ----------------------------------------------------------------------

def test_whole_path_spectrum():
    g = generate("path:5")
    expected = [2.0 * (1.0 - math.cos(k * math.pi / 5)) for k in range(5)]
    spectrum = dirichlet_spectrum(g)
    assert list(spectrum.eigenvalues) == pytest.approx(expected, abs=1e-10)
    assert spectrum.mu1 == pytest.approx(0.0, abs=1e-12)
    assert spectrum.spectral_gap == pytest.approx(expected[1])


def test_dirichlet_path_spectrum():
    g = generate("path:5")
    spectrum = dirichlet_spectrum(g, ["1", "2", "3"])
    expected = [2.0 - math.sqrt(2.0), 2.0, 2.0 + math.sqrt(2.0)]
    assert list(spectrum.eigenvalues) == pytest.approx(expected, abs=1e-10)
    # eigenfunctions vanish off Omega
    assert spectrum.eigenfunction(1)("0") == 0.0


def test_eigenfunctions_are_m_orthonormal():
    g = generate("star:3,2", m_mode="degree")
    spectrum = dirichlet_spectrum(g)
    orth, residual = spectrum_defects(g, spectrum)
    assert orth < 1e-10
    assert residual < 1e-10
    phi = spectrum.eigenfunctions()
    assert inner_product(g, phi[2], phi[2]) == pytest.approx(1.0)
    assert inner_product(g, phi[1], phi[4]) == pytest.approx(0.0, abs=1e-12)


def test_spectrum_is_cached_per_domain():
    g = generate("path:5")
    assert dirichlet_spectrum(g) is dirichlet_spectrum(g)
    assert dirichlet_spectrum(g, ["1", "2"]) is not dirichlet_spectrum(g)


def test_rayleigh_quotient_bounds_mu1():
    g = generate("path:7")
    omega = ["1", "2", "3", "4", "5"]
    spectrum = dirichlet_spectrum(g, omega)
    tent = VertexFunction.from_mapping(g, {"1": 1, "2": 2, "3": 3, "4": 2, "5": 1})
    assert rayleigh_mu1(g, omega, tent) >= spectrum.mu1 - 1e-12
    assert rayleigh_mu1(g, omega, spectrum.eigenfunction(1)) == pytest.approx(spectrum.mu1)


def test_rayleigh_rejects_functions_outside_domain():
    g = generate("path:5")
    with pytest.raises(ValueError):
        rayleigh_mu1(g, ["1", "2"], [1.0, 1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        rayleigh_mu1(g, ["1", "2"], np.zeros(5))


@pytest.mark.parametrize("omega", [None, ["a", "b", "c"], ["c", "d"]])
def test_spectrum_reconstructs_the_operator(omega):
    g = _weighted_path()
    spectrum = dirichlet_spectrum(g, omega)
    domain = spectrum.domain
    phi, m = spectrum.eigenvectors, g.measure[domain.indices]
    # phi is m-orthonormal, so -Delta_Omega = phi diag(lambda) phi^T M
    rebuilt = phi @ np.diag(spectrum.eigenvalues) @ phi.T @ np.diag(m)
    assert np.allclose(rebuilt, dirichlet_matrix(g, domain), atol=1e-10)


def test_mu1_decreases_along_nested_domains():
    g = generate("lattice:2,4")
    mu1 = [dirichlet_spectrum(g, ball(g, "0,0", r)).mu1 for r in range(5)]
    assert all(later < earlier for earlier, later in zip(mu1, mu1[1:]))
    assert mu1[-1] == pytest.approx(0.0, abs=1e-12)
