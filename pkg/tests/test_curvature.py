# tests/test_curvature.py

import math

import numpy as np
import pytest

from dggkit import config as cfg
from dggkit.config import DggKitConfig
from dggkit.curvature import (
    KIND_CD, KIND_CDE, STATUS_CERTIFIED, STATUS_INCONCLUSIVE, AdmissibilityError,
    cd_ratio, cde_ratio, certificate_from_bound, clause_table, estimate_curvature,
    ratio_from_witness, verify_strong_cutoff,
)
from dggkit.graph_core import distances_from, generate
from dggkit.operators import VertexFunction


@pytest.fixture(autouse=True)
def reset_config():
    original = cfg._CONFIG
    cfg._CONFIG = DggKitConfig()
    yield
    cfg._CONFIG = original


def _tent(g, x0, R):
    dist = distances_from(g, g.subset([x0]))
    return VertexFunction(g, np.clip(1.0 - dist / R, 0.0, 1.0))


# ----------------------------------------------------------------------
# Ratios
# ----------------------------------------------------------------------

def test_cd_ratio_on_two_vertices():
    g = generate("path:2")
    assert cd_ratio(g, [0.0, 1.0], "0") == pytest.approx(2.0)
    assert cd_ratio(g, [0.0, 1.0], "0", n=2) == pytest.approx(1.0)
    # scale and constants do not matter
    assert cd_ratio(g, [5.0, -1.0], "0") == pytest.approx(2.0)


def test_cde_ratio_on_two_vertices():
    g = generate("path:2")
    assert cde_ratio(g, [2.0, 1.0], "0") == pytest.approx(9.0 / 4.0)
    assert cde_ratio(g, [2.0, 1.0], "0", n=2) == pytest.approx(5.0 / 4.0)


def test_cd_ratio_of_linear_function_on_integers():
    g = generate("lattice:1,3")
    f = [float(v) for v in g.vertices]
    assert cd_ratio(g, f, "0") == pytest.approx(0.0, abs=1e-12)
    assert cd_ratio(g, f, "0", n=2) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("f", [[1.0, 2.0], [1.0, 0.0], [1.0, -1.0]])
def test_cde_rejects_inadmissible_functions(f):
    g = generate("path:2")
    with pytest.raises(AdmissibilityError):
        cde_ratio(g, f, "0")


def test_cd_rejects_constant_function():
    g = generate("path:3")
    with pytest.raises(AdmissibilityError):
        cd_ratio(g, [4.0, 4.0, 4.0], "1")


def test_dimension_must_be_positive():
    with pytest.raises(ValueError):
        cd_ratio(generate("path:2"), [0.0, 1.0], "0", n=0)


def test_ratios_only_see_the_two_ball():
    g = generate("lattice:2,3")
    rng = np.random.default_rng(3)
    dist = distances_from(g, ["0,0"])
    f = 1.0 + rng.random(len(g))
    f[g.index("0,0")] = 3.0
    outside = f.copy()
    outside[dist > 2] = 0.1 + 50.0 * rng.random(int(np.sum(dist > 2)))
    for ratio in (cd_ratio, cde_ratio):
        assert ratio(g, outside, "0,0", n=2) == ratio(g, f, "0,0", n=2)

    inside = f.copy()
    inside[g.index("2,0")] += 0.5
    assert cde_ratio(g, inside, "0,0", n=2) != cde_ratio(g, f, "0,0", n=2)


# ----------------------------------------------------------------------
# Search
# ----------------------------------------------------------------------

def test_cd_search_on_two_vertices_is_certified():
    g = generate("path:2")
    cert = estimate_curvature(g, "0", n=math.inf, kind=KIND_CD, restarts=4, max_evaluations=200)
    assert cert.bound_K == pytest.approx(2.0, rel=1e-9)
    assert cert.status == STATUS_CERTIFIED
    assert cert.supported_K == pytest.approx(2.0 - 1e-6, rel=1e-9)


def test_cde_search_on_two_vertices():
    g = generate("path:2")
    cert = estimate_curvature(g, "0", n=math.inf, kind=KIND_CDE, restarts=4, max_evaluations=500)
    # ratio is 2 + (1 - b)^2 / 2b for f = (1, b), b < 1
    assert 2.0 - 1e-9 <= cert.bound_K <= 2.01
    assert ratio_from_witness(cert) == pytest.approx(cert.bound_K, rel=1e-9)


def test_cd_search_on_integers_finds_flat_curvature():
    g = generate("lattice:1,3")
    for n in (math.inf, 2.0):
        cert = estimate_curvature(g, "0", n=n, kind=KIND_CD, restarts=6, max_evaluations=4000)
        assert -1e-9 <= cert.bound_K <= 1e-4
        assert ratio_from_witness(cert) == pytest.approx(cert.bound_K, abs=1e-12)


def test_certificate_is_below_random_admissible_ratios():
    g = generate("lattice:1,6")
    cert = estimate_curvature(g, "0", n=2, kind=KIND_CDE)
    assert cert.status == STATUS_CERTIFIED
    rng = np.random.default_rng(2024)
    center = g.index("0")
    for _ in range(100):
        f = np.exp(rng.uniform(-1.0, 1.0, len(g)))
        # a strict local maximum at the center makes Delta f(0) < 0
        f[center] = math.exp(1.5)
        assert cde_ratio(g, f, "0", n=2) >= cert.bound_K - 1e-9


def test_translated_vertices_get_the_same_bound():
    g = generate("lattice:1,8")
    bounds = [
        estimate_curvature(g, x, n=2.0, kind=KIND_CD, restarts=6, max_evaluations=4000).bound_K
        for x in ("0", "2", "-3")
    ]
    assert max(bounds) - min(bounds) < 1e-4


def test_search_is_deterministic_for_a_seed(monkeypatch):
    g = generate("lattice:2,3")
    first = estimate_curvature(g, "0,0", n=4, kind=KIND_CDE, restarts=3, seed=11, max_evaluations=300)
    second = estimate_curvature(g, "0,0", n=4, kind=KIND_CDE, restarts=3, seed=11, max_evaluations=300)
    assert first.bound_K == second.bound_K
    assert np.array_equal(first.witness.values, second.witness.values)

    monkeypatch.setenv(cfg.THREADS_ENV, "3")
    threaded = estimate_curvature(g, "0,0", n=4, kind=KIND_CDE, restarts=3, seed=11, max_evaluations=300)
    assert threaded.bound_K == first.bound_K


def test_search_rejects_bad_arguments():
    g = generate("path:3")
    with pytest.raises(ValueError):
        estimate_curvature(g, "1", kind="ricci")
    with pytest.raises(ValueError):
        estimate_curvature(g, "1", restarts=0)


def test_certificate_to_dict_lists_patch_witness():
    g = generate("path:5")
    cert = estimate_curvature(g, "2", n=2, kind=KIND_CD, restarts=2, max_evaluations=200)
    payload = cert.to_dict()
    assert set(payload["witness"]) == {"0", "1", "2", "3", "4"}
    assert payload["kind"] == KIND_CD
    assert payload["restarts"] == 2


def test_asserted_certificate():
    g = generate("path:5")
    cert = certificate_from_bound(g, "2", 2.0, -0.5)
    assert cert.status == STATUS_INCONCLUSIVE
    assert cert.bound_K == -0.5
    assert cert.kind == KIND_CDE
    with pytest.raises(ValueError):
        certificate_from_bound(g, "2", 2.0, 0.0, kind="other")


# ----------------------------------------------------------------------
# Strong cut-off functions
# ----------------------------------------------------------------------

def test_tent_is_a_strong_cutoff_on_path():
    g = generate("path:7")
    phi = _tent(g, "3", 3)
    report = verify_strong_cutoff(g, phi, "3", ["1", "2", "3", "4", "5"], c=10.0, R=3.0, K=0.0)
    assert report.passed
    assert clause_table(report) == {"1": "1", "2": "2", "3": "2", "4": "2", "5": "1"}


def test_small_c_rejects_tent():
    g = generate("path:7")
    phi = _tent(g, "3", 3)
    report = verify_strong_cutoff(g, phi, "3", ["1", "2", "3", "4", "5"], c=0.01, R=3.0)
    assert not report.passed
    assert clause_table(report)["1"] == "none"


def test_cutoff_must_be_one_at_center_and_zero_off_support():
    g = generate("path:7")
    phi = _tent(g, "3", 3)
    off_center = verify_strong_cutoff(g, phi.scaled(0.5), "3", ["1", "2", "3", "4", "5"], c=10.0, R=3.0)
    assert not off_center.passed
    narrow = verify_strong_cutoff(g, phi, "3", ["2", "3", "4"], c=10.0, R=3.0)
    assert any(e.label == "phi = 0 off S" and not e.passed for e in narrow.entries)


def test_cutoff_argument_checks():
    g = generate("path:7")
    with pytest.raises(ValueError):
        verify_strong_cutoff(g, np.full(7, 2.0), "3", ["3"], c=1.0, R=1.0)
    with pytest.raises(ValueError):
        verify_strong_cutoff(g, _tent(g, "3", 3), "3", ["3"], c=0.0, R=1.0)
