"""
Tests for dggkit.config:
- defaults and unknown tolerance names
- flat mapping -> DggKitConfig (invalid values ignored)
- .dggkit.yml / .dggkit.json discovery in the working directory
- DGG_KIT_THREADS override
- the dense-solver cap as seen by dirichlet_spectrum
"""

import json

import pytest

from dggkit import config as cfg
from dggkit.config import DggKitConfig, config_from_mapping
from dggkit.graph_core import generate
from dggkit.operators import SpectrumError, dirichlet_spectrum


@pytest.fixture(autouse=True)
def reset_config():
    """
    Swap cfg._CONFIG per test and restore it afterwards, so a stray
    .dggkit.yml in the checkout never leaks into assertions.
    """
    original = cfg._CONFIG
    cfg._CONFIG = DggKitConfig()
    yield
    cfg._CONFIG = original


# ----------------------------------------------------------------------
# Defaults
# ----------------------------------------------------------------------

def test_default_tolerances():
    assert cfg.get_tolerance("eigen") == 1e-8
    assert cfg.get_tolerance("dgg_relative") == 1e-9
    assert cfg.get_tolerance("dgg_absolute_floor") == 1e-12
    assert cfg.get_tolerance("cheng") == 1e-3


def test_unknown_tolerance_raises_key_error():
    with pytest.raises(KeyError):
        cfg.get_tolerance("no_such_tolerance")


def test_default_limits(monkeypatch):
    monkeypatch.delenv(cfg.THREADS_ENV, raising=False)
    assert cfg.get_max_dense_vertices() == 2000
    assert cfg.get_thread_limit() == 1
    assert cfg.get_curvature_defaults() == {"restarts": 64, "max_evaluations": 50000}


# ----------------------------------------------------------------------
# Mapping
# ----------------------------------------------------------------------

def test_config_from_mapping_reads_suffixed_and_bare_keys():
    config = config_from_mapping({
        "eigen_tolerance": "1e-6",
        "dgg_absolute_floor": 1e-10,
        "kernel_floor": 1e-9,
        "curvature_restarts": 8,
        "threads": 3,
    })
    assert config.tolerances["eigen"] == 1e-6
    assert config.tolerances["dgg_absolute_floor"] == 1e-10
    assert config.tolerances["kernel_floor"] == 1e-9
    assert config.curvature_restarts == 8
    assert config.threads == 3


def test_invalid_values_fall_back_to_defaults():
    config = config_from_mapping({
        "eigen_tolerance": "not a number",
        "mixing_tolerance": -1,
        "bogus_tolerance": 0.5,
        "max_dense_vertices": 0,
        "threads": "many",
    })
    assert config.tolerances["eigen"] == 1e-8
    assert config.tolerances["mixing"] == 1e-10
    assert "bogus" not in config.tolerances
    assert config.max_dense_vertices == 2000
    assert config.threads == 1


# ----------------------------------------------------------------------
# Files and environment
# ----------------------------------------------------------------------

def test_yaml_file_in_working_directory(tmp_path, monkeypatch):
    (tmp_path / ".dggkit.yml").write_text(
        "# local overrides\n"
        "convergence_tolerance: 1e-7\n"
        "max_dense_vertices: 500\n",
        encoding="utf-8",
    )
    monkeypatch.chdir(tmp_path)
    cfg._CONFIG = cfg._load_config()

    assert cfg.get_tolerance("convergence") == pytest.approx(1e-7)
    assert cfg.get_max_dense_vertices() == 500


def test_json_file_in_working_directory(tmp_path, monkeypatch):
    (tmp_path / ".dggkit.json").write_text(
        json.dumps({"curvature_max_evaluations": 1234, "weight_tolerance": 1e-8}),
        encoding="utf-8",
    )
    monkeypatch.chdir(tmp_path)
    cfg._CONFIG = cfg._load_config()

    assert cfg.get_curvature_defaults()["max_evaluations"] == 1234
    assert cfg.get_tolerance("weight") == pytest.approx(1e-8)


def test_unreadable_file_gives_defaults(tmp_path, monkeypatch):
    (tmp_path / ".dggkit.json").write_text("{ this is not json", encoding="utf-8")
    monkeypatch.chdir(tmp_path)
    cfg._CONFIG = cfg._load_config()

    assert cfg.get_tolerance("eigen") == 1e-8
    assert cfg.get_max_dense_vertices() == 2000


def test_no_file_gives_defaults(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg._CONFIG = cfg._load_config()
    assert cfg._CONFIG.tolerances == DggKitConfig().tolerances


def test_thread_env_overrides_config(monkeypatch):
    cfg._CONFIG = DggKitConfig(threads=2)
    monkeypatch.setenv(cfg.THREADS_ENV, "4")
    assert cfg.get_thread_limit() == 4

    monkeypatch.setenv(cfg.THREADS_ENV, "zero")
    assert cfg.get_thread_limit() == 2


def test_dense_cap_is_enforced():
    cfg._CONFIG = DggKitConfig(max_dense_vertices=10)
    g = generate("path:11")
    with pytest.raises(SpectrumError):
        dirichlet_spectrum(g)
    # a smaller domain stays under the cap
    assert len(dirichlet_spectrum(g, [str(i) for i in range(1, 6)])) == 5
