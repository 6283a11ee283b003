# tests/test_estimates.py

import math

import numpy as np
import pytest

from dggkit import config as cfg
from dggkit.config import DggKitConfig
from dggkit.curvature import certificate_from_bound
from dggkit.estimates import (
    EigenBoundInput, HarnackParams, RegimeError, all_pairs_sample, cheng_check,
    diameter_bound, diameter_check, eigen_table_csv, eigenvalue_check,
    eigenvalue_upper_bound, eigenvalue_upper_bound_simplified, finite_mixing_check,
    gaussian_fit, harnack_check, harnack_log_factor, isoperimetric_bound,
    isoperimetric_check, li_yau_check, li_yau_strong_check, mixing_monitor,
)
from dggkit.graph_core import MeasuredGraph, distances_from, exhaust, generate
from dggkit.operators import VertexFunction, dirichlet_spectrum
from dggkit.report import STATUS_CUTOFF_REJECTED, STATUS_FALSIFIED

# e^{-2} (I_0(2) + I_1(2)): p_1 at the end of a long path
HALF_LINE_P1 = 0.523778


@pytest.fixture(autouse=True)
def reset_config():
    original = cfg._CONFIG
    cfg._CONFIG = DggKitConfig()
    yield
    cfg._CONFIG = original


def _cert(g, n=2.0, bound_K=0.0):
    return certificate_from_bound(g, g.vertices[0], n, bound_K)


def _path_family(n):
    g = generate("path", 4 * n + 1)
    A1 = [str(i) for i in range(n + 1)]
    A2 = [str(i) for i in range(3 * n, 4 * n + 1)]
    return EigenBoundInput.from_sets(g, [A1, A2])


def _star_family(n, k=3):
    g = generate("star", k, n)
    sets = [[f"{arm}:{j}" for j in range(n, 2 * n + 1)] for arm in range(1, k + 1)]
    return EigenBoundInput.from_sets(g, sets)


def _tent(g, x0, R):
    dist = distances_from(g, g.subset([x0]))
    return VertexFunction(g, np.clip(1.0 - dist / R, 0.0, 1.0))


# ----------------------------------------------------------------------
# Eigenvalue bounds
# ----------------------------------------------------------------------

def test_eigen_input_needs_two_disjoint_sets():
    g = generate("path:9")
    with pytest.raises(ValueError):
        EigenBoundInput.from_sets(g, [["0"]])
    with pytest.raises(ValueError):
        EigenBoundInput.from_sets(g, [["0", "1"], ["1", "2"]])
    inp = EigenBoundInput.from_sets(g, [["0"], ["1"], ["8"]])
    assert inp.k == 3
    assert inp.delta == 1


@pytest.mark.parametrize("n", [2, 5, 10])
def test_path_bounds_hold(n):
    inp = _path_family(n)
    assert inp.delta == 2 * n
    report = eigenvalue_check(inp)
    assert report.passed
    assert report.params["bound"] >= report.params["lambda_k"]
    assert report.params["simplified_bound"] >= report.params["lambda_k"]
    assert "relaxation" in {e.label for e in report.entries}


def test_simplified_bound_decays_like_inverse_square():
    small = eigenvalue_upper_bound_simplified(_path_family(5))
    large = eigenvalue_upper_bound_simplified(_path_family(10))
    assert 0.2 <= large / small <= 0.3
    assert 8.0 <= small * 25 <= 8.8
    assert 8.0 <= large * 100 <= 8.8


@pytest.mark.parametrize("family", [_path_family, _star_family])
def test_bounds_scale_like_inverse_square(family):
    scaled = {"bound": [], "simplified_bound": []}
    for n in (5, 10, 20, 40):
        report = eigenvalue_check(family(n))
        assert report.passed
        for key in scaled:
            scaled[key].append(report.params[key] * n * n)
    for values in scaled.values():
        assert max(values) <= 2.0 * min(values)


def test_simplified_bound_with_unit_sigma():
    # P21, |A1| = |A2| = 6, delta = 10, D_m = 2
    expected = 4.0 * 2.0 * math.log(7.0) ** 2 / (math.asinh(1.0) * 100.0)
    assert eigenvalue_upper_bound_simplified(_path_family(5), 1.0) == pytest.approx(expected)


def test_doubling_the_measure_halves_the_bounds():
    inp = _path_family(3)
    g = inp.graph
    heavy = MeasuredGraph(g.vertices, g.edges, 2.0 * g.measure)
    heavy_inp = EigenBoundInput.from_sets(heavy, [sorted(A.members) for A in inp.sets])
    assert eigenvalue_upper_bound(heavy_inp)[0] == pytest.approx(eigenvalue_upper_bound(inp)[0] / 2.0)
    assert eigenvalue_upper_bound_simplified(heavy_inp) == pytest.approx(
        eigenvalue_upper_bound_simplified(inp) / 2.0
    )


def test_star_bound():
    inp = _star_family(5)
    assert inp.delta == 10
    report = eigenvalue_check(inp)
    assert report.passed
    assert report.params["lambda_k"] == pytest.approx(float(dirichlet_spectrum(inp.graph).eigenvalues[2]))
    assert report.params["bound"] == pytest.approx(0.70, abs=0.02)

    ratio = eigenvalue_upper_bound(_star_family(10))[0] / report.params["bound"]
    assert 0.1875 <= ratio <= 0.3125


def test_explicit_sigma_outside_relaxation_regime():
    report = eigenvalue_check(_path_family(3), sigma=100.0)
    assert report.params["sigma_choice"] == "explicit"
    assert "relaxation" not in {e.label for e in report.entries}
    assert report.notes
    with pytest.raises(ValueError):
        eigenvalue_check(_path_family(3), sigma=-1.0)


def test_eigen_table_csv():
    _, rows = eigenvalue_upper_bound(_star_family(2))
    lines = eigen_table_csv(rows).splitlines()
    assert lines[0] == "pair,log_ratio,h_value,term"
    assert [line.split(",")[0] for line in lines[1:]] == ["1-2", "1-3", "2-3"]


# ----------------------------------------------------------------------
# Diameter and isoperimetric
# ----------------------------------------------------------------------

def test_diameter_bound():
    assert diameter_bound(generate("path:2")) == pytest.approx(9.4, abs=0.1)
    for spec in ("path:2", "path:11", "star:3,2"):
        report = diameter_check(generate(spec))
        assert report.passed
        assert report.params["diameter"] <= report.params["bound"]


def test_isoperimetric_bound():
    g = generate("path:21")
    report = isoperimetric_check(g, ["10"], [1, 2, 3, 5])
    assert report.passed
    bounds = [e.lhs for e in report.entries]
    assert bounds == sorted(bounds)
    assert [e.rhs for e in report.entries] == [3.0, 5.0, 7.0, 11.0]
    with pytest.raises(ValueError):
        isoperimetric_bound(g, ["10"], 0)


# ----------------------------------------------------------------------
# Mixing
# ----------------------------------------------------------------------

def test_mixing_on_two_vertices():
    g = generate("path:2")
    report = mixing_monitor(g, [0.0, 1.0, 3.0])
    assert report.passed
    assert report.params["lambda_2"] == pytest.approx(2.0)
    # h_t(x, x) e^{2t} stays at 1/2
    assert all(e.lhs == pytest.approx(0.5) for e in report.entries if "x=" in e.label)
    assert len(report.entries) == 2 * 2 + 3


def test_mixing_on_path():
    report = mixing_monitor(generate("path:5"), [0.0, 0.5, 1.0, 4.0, 10.0])
    assert report.passed
    with pytest.raises(ValueError):
        mixing_monitor(generate("path:5"), [1.0])


# ----------------------------------------------------------------------
# Li-Yau
# ----------------------------------------------------------------------

def test_li_yau_weak_form_passes():
    g = generate("lattice:1,6")
    u0 = VertexFunction.indicator(g, ["0"])
    report = li_yau_check(g, _cert(g), "0", 2, u0, [0.5, 1.0, 2.0])
    assert report.passed
    assert report.params["form"] == "nonnegative curvature"
    # n / 2t + n (1 + D_mu) D_m / R at t = 0.5
    assert report.entries[0].rhs == pytest.approx(8.0)
    center = next(e for e in report.entries if e.label == "t=0.5 x=0")
    assert center.lhs == pytest.approx(0.66, abs=0.01)


def test_li_yau_tiny_dimension_is_falsified():
    g = generate("lattice:1,6")
    u0 = VertexFunction.indicator(g, ["0"])
    report = li_yau_check(g, _cert(g, n=0.01), "0", 2, u0, [0.5])
    assert not report.passed
    assert report.effective_status() == STATUS_FALSIFIED
    assert report.notes


def test_li_yau_lhs_does_not_depend_on_q():
    g = generate("lattice:1,6")
    u0 = VertexFunction.indicator(g, ["0"])
    plain = li_yau_check(g, _cert(g), "0", 2, u0, [0.5, 2.0], rho=0.5)
    shifted = li_yau_check(g, _cert(g), "0", 2, u0, [0.5, 2.0], rho=0.5, q=1.0)
    assert plain.params["form"] == shifted.params["form"] == "negative curvature"
    for a, b in zip(plain.entries, shifted.entries):
        assert a.lhs == pytest.approx(b.lhs, rel=1e-9, abs=1e-12)


def test_li_yau_negative_curvature_form():
    g = generate("lattice:1,6")
    u0 = VertexFunction.indicator(g, ["0"])
    report = li_yau_check(g, _cert(g, bound_K=-0.5), "0", 2, u0, [0.5, 1.0])
    assert report.params["K"] == 0.5
    assert report.passed


def test_li_yau_argument_checks():
    g = generate("lattice:1,6")
    u0 = VertexFunction.indicator(g, ["0"])
    with pytest.raises(ValueError):
        li_yau_check(g, _cert(g), "0", 2, u0, [0.5], Omega=["-1", "0", "1"])
    with pytest.raises(ValueError):
        li_yau_check(g, _cert(g), "0", 2, u0, [0.0])
    with pytest.raises(ValueError):
        li_yau_check(g, _cert(g), "0", 2, np.zeros(len(g)), [0.5])
    with pytest.raises(ValueError):
        li_yau_check(g, _cert(g), "0", 2, u0, [0.5], rho=1.5)


def test_strong_form_with_tent_cutoff():
    g = generate("path:7")
    u0 = VertexFunction.indicator(g, ["3"])
    S = ["1", "2", "3", "4", "5"]
    report = li_yau_strong_check(g, _cert(g), _tent(g, "3", 3), "3", S, 10.0, 3.0, u0, [0.5, 1.0, 2.0])
    assert report.passed
    assert len(report.entries) == 3
    assert report.extra["cutoff"]["status"] == "pass"
    # the cut-off term alone is about 84
    assert all(e.rhs > 84.0 for e in report.entries)


def test_strong_form_rejects_bad_cutoff():
    g = generate("path:7")
    u0 = VertexFunction.indicator(g, ["3"])
    S = ["1", "2", "3", "4", "5"]
    report = li_yau_strong_check(g, _cert(g), _tent(g, "3", 3), "3", S, 0.01, 3.0, u0, [0.5])
    assert report.effective_status() == STATUS_CUTOFF_REJECTED
    assert not report.entries
    assert not report.passed


# ----------------------------------------------------------------------
# Harnack
# ----------------------------------------------------------------------

def test_harnack_on_two_vertices():
    g = generate("path:2")
    params = HarnackParams(n=2.0, K=0.0, T1=1.0, T2=2.0)
    report = harnack_check(g, params, [1.0, 2.0], [("0", "1"), ("1", "0")])
    assert report.passed
    first = report.entries[0]
    assert first.lhs == pytest.approx(1.5 - 0.5 * math.exp(-2.0))
    later = 1.5 + 0.5 * math.exp(-4.0)
    assert first.rhs == pytest.approx(later * math.exp(harnack_log_factor(params, 1, 1.0, 1.0)))


def test_harnack_equal_times():
    g = generate("path:2")
    params = HarnackParams(n=2.0, K=0.0, T1=1.0, T2=1.0)
    report = harnack_check(g, params, [1.0, 2.0], [("0", "0"), ("0", "1")])
    assert report.passed
    same, other = report.entries
    assert same.lhs == same.rhs
    assert other.rhs == math.inf
    assert harnack_log_factor(params, 0, 1.0, 1.0) == 0.0
    assert harnack_log_factor(params, 1, 1.0, 1.0) == math.inf


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9])
def test_harnack_on_integers(rho):
    g = generate("lattice:1,6")
    params = HarnackParams(n=2.0, K=0.0, rho=rho, T1=1.0, T2=2.0)
    u0 = VertexFunction.indicator(g, ["0"])
    report = harnack_check(g, params, u0, [("0", "1"), ("2", "-1"), ("0", "0")])
    assert report.passed


def test_harnack_argument_checks():
    g = generate("path:2")
    with pytest.raises(ValueError):
        HarnackParams(n=2.0, K=0.0, T1=2.0, T2=1.0)
    with pytest.raises(ValueError):
        HarnackParams(n=2.0, K=-1.0)
    params = HarnackParams(n=2.0, K=0.0)
    with pytest.raises(ValueError):
        harnack_check(g, params, [0.0, 0.0], [("0", "1")])
    with pytest.raises(ValueError):
        harnack_check(g, params, [1.0, 1.0], [])


def test_harnack_params_from_certificate():
    g = generate("path:2")
    params = HarnackParams.from_certificate(_cert(g, n=3.0, bound_K=-0.25))
    assert (params.n, params.K) == (3.0, 0.25)


# ----------------------------------------------------------------------
# Spectral bottom
# ----------------------------------------------------------------------

def test_cheng_on_integers():
    ex = exhaust("lattice", 1, [4, 8, 16])
    report = cheng_check(ex, _cert(ex.host, n=2.0, bound_K=0.0))
    assert report.passed
    sequence = report.params["mu1_sequence"]
    assert sequence == sorted(sequence, reverse=True)


def test_cheng_on_tree():
    ex = exhaust("tree", 3, [3, 4, 5])
    flat = cheng_check(ex, _cert(ex.host, n=2.0, bound_K=0.0))
    assert flat.effective_status() == STATUS_FALSIFIED
    assert 0.1 < flat.params["mu_extrapolated"] <= flat.params["mu_last"]

    curved = cheng_check(ex, _cert(ex.host, n=2.0, bound_K=-1.0))
    assert curved.passed


def test_cheng_needs_three_stages():
    ex = exhaust("lattice", 1, [2, 4])
    with pytest.raises(ValueError):
        cheng_check(ex, _cert(ex.host))
    ex = exhaust("lattice", 1, [2, 4, 6])
    with pytest.raises(ValueError):
        cheng_check(ex, _cert(ex.host), stages=2)


# ----------------------------------------------------------------------
# Gaussian constants and finite mixing
# ----------------------------------------------------------------------

def test_gaussian_fit_on_long_path():
    g = generate("path:21")
    fit = gaussian_fit(g, _cert(g), 1.0, 0.5, 1.0, [0.0], all_pairs_sample(g, [1.0, 2.0, 4.0]))
    # attained at the end vertex at t = 1, where the 1-ball has measure 2
    assert fit.C1_fitted == pytest.approx(2.0 * HALF_LINE_P1, rel=1e-4)
    assert fit.as_dict()["C1"] == fit.C1_fitted

    dense = gaussian_fit(
        g, _cert(g), 1.0, 0.5, 1.0, [0.0], all_pairs_sample(g, [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 9.0]),
    )
    assert dense.C1_fitted == pytest.approx(fit.C1_fitted, rel=1e-12)


def test_gaussian_frontier_decreases_with_C2():
    g = generate("path:9")
    fit = gaussian_fit(g, _cert(g, bound_K=-0.5), 0.5, 0.5, 1.0, [0.0, 0.5, 1.0, 2.0],
                       all_pairs_sample(g, [1.0, 2.0, 4.0]))
    C1_values = [c1 for _, c1 in fit.frontier]
    assert C1_values == sorted(C1_values, reverse=True)
    assert fit.C2 == 0.0
    assert fit.K == 0.5


def test_gaussian_fit_argument_checks():
    g = generate("path:21")
    with pytest.raises(RegimeError):
        gaussian_fit(g, _cert(g), 1.0, 0.5, 1.0, [0.0], [("0", "20", 1.0)])
    with pytest.raises(ValueError):
        gaussian_fit(g, _cert(g), 1.0, 0.0, 1.0, [0.0], [("0", "0", 1.0)])
    with pytest.raises(ValueError):
        gaussian_fit(g, _cert(g), 1.0, 0.5, 1.0, [], [("0", "0", 1.0)])


def test_gaussian_fit_ignores_round_off_entries():
    g = generate("path:80")
    # beta = 0.01 admits every pair at t = 1, including ends 79 hops apart
    fit = gaussian_fit(g, _cert(g), 1.0, 0.1, 0.01, [0.0], all_pairs_sample(g, [1.0]))
    assert fit.grid["below_floor"] > 0
    assert 1.0 < fit.C1_fitted < 10.0
    with pytest.raises(RegimeError):
        gaussian_fit(g, _cert(g), 1.0, 0.1, 0.01, [0.0], [("0", "79", 1.0)])


def test_finite_mixing_on_path():
    g = generate("path:5")
    fit = gaussian_fit(g, _cert(g), 1.0, 0.5, 1.0, [0.0], all_pairs_sample(g, [1.0, 2.0, 4.0, 8.0, 16.0]))
    report = finite_mixing_check(g, fit, [10.0, 20.0, 30.0, 40.0])
    assert report.passed
    assert report.params["diameter"] == 4
    assert [e.label for e in report.entries if not e.label.startswith("start")] == ["t=20", "t=30", "t=40"]
    assert sum(e.label.startswith("start") for e in report.entries) == 5
    assert any("skipped" in n for n in report.notes)
