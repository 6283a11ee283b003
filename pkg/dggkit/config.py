"""
dggkit.config

Loads dgg-kit configuration from .dggkit.yml / .dggkit.json (if present)
and exposes small helper functions used by the numerical modules.

Design goals:
- Best-effort: if the config file is missing or invalid, fall back to defaults.
- No hard dependency on PyYAML; we support the flat `key: value` subset used here.
- Loaded once at import time (cheap and predictable).
- Small public API:
    - get_tolerance(name)
    - get_thread_limit()
    - get_max_dense_vertices()
    - get_curvature_defaults()
"""

import json
import os
from typing import Any, Dict, Optional

try:
    import yaml  # type: ignore
except ImportError:
    yaml = None  # YAML is optional; we have a fallback parser for flat configs.


THREADS_ENV = "DGG_KIT_THREADS"

_DEFAULT_TOLERANCES: Dict[str, float] = {
    "eigen": 1e-8,
    "convergence": 1e-9,
    "monotonicity": 1e-12,
    "dgg_relative": 1e-9,
    "dgg_absolute_floor": 1e-12,
    "weight": 1e-10,
    "imp_relative_slack": 1e-9,
    "mixing": 1e-10,
    "curvature_margin": 1e-6,
    "curvature_agreement": 1e-6,
    "cheng": 1e-3,
    "kernel_floor": 1e-12,
}


# ======================================================================
# Internal config representation
# ======================================================================

class DggKitConfig:
    """
    In-memory representation of .dggkit config.

    Fields:
        tolerances: name -> positive float, see _DEFAULT_TOLERANCES
                    (file keys are "<name>_tolerance", e.g. eigen_tolerance)
        max_dense_vertices: cap on |Omega| for dense eigensolves
        curvature_restarts: default multi-start count
        curvature_max_evaluations: local-search budget per restart
        threads: worker cap for independent restarts / grid points
    """

    def __init__(
        self,
        tolerances: Optional[Dict[str, Any]] = None,
        max_dense_vertices: Optional[int] = None,
        curvature_restarts: Optional[int] = None,
        curvature_max_evaluations: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> None:
        self.tolerances: Dict[str, float] = dict(_DEFAULT_TOLERANCES)
        for name, value in (tolerances or {}).items():
            if name not in _DEFAULT_TOLERANCES:
                continue
            tol = _as_positive_float(value)
            if tol is not None:
                self.tolerances[name] = tol

        self.max_dense_vertices: int = _as_positive_int(max_dense_vertices) or 2000
        self.curvature_restarts: int = _as_positive_int(curvature_restarts) or 64
        self.curvature_max_evaluations: int = (
            _as_positive_int(curvature_max_evaluations) or 50000
        )
        self.threads: int = _as_positive_int(threads) or 1


def _as_positive_float(value: Any) -> Optional[float]:
    try:
        out = float(value)
    except (TypeError, ValueError):
        return None
    return out if out > 0 else None


def _as_positive_int(value: Any) -> Optional[int]:
    try:
        out = int(value)
    except (TypeError, ValueError):
        return None
    return out if out > 0 else None


# ======================================================================
# Loading helpers
# ======================================================================

def _load_yaml_with_fallback(path: str) -> Dict[str, Any]:
    """
    Load a flat YAML mapping.

    Priority:
    1. If PyYAML is installed, use yaml.safe_load.
    2. Otherwise, parse lines of the form

           key: value

       Lines starting with '#' are treated as comments.

    If anything looks wrong, return {} so we fall back to defaults.
    """
    if yaml is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except Exception:
            return {}
        return data if isinstance(data, dict) else {}

    data: Dict[str, Any] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            for raw_line in f:
                stripped = raw_line.split("#", 1)[0].strip()
                if not stripped or ":" not in stripped:
                    continue
                key, value = stripped.split(":", 1)
                value = value.strip().strip("'\"")
                if key.strip() and value:
                    data[key.strip()] = value
    except Exception:
        return {}
    return data


def _load_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return data if isinstance(data, dict) else {}
    except Exception:
        return {}


def _find_config_file() -> Optional[str]:
    """
    Look for a config file in the current working directory:

        .dggkit.yml
        .dggkit.yaml
        .dggkit.json
    """
    for name in (".dggkit.yml", ".dggkit.yaml", ".dggkit.json"):
        if os.path.isfile(name):
            return name
    return None


def config_from_mapping(raw: Dict[str, Any]) -> DggKitConfig:
    tolerances = {
        key[: -len("_tolerance")]: value
        for key, value in raw.items()
        if isinstance(key, str) and key.endswith("_tolerance")
    }
    # a few tolerances read better without the suffix in the file
    for name in ("dgg_absolute_floor", "imp_relative_slack", "curvature_margin",
                 "curvature_agreement", "kernel_floor"):
        if name in raw:
            tolerances[name] = raw[name]
    return DggKitConfig(
        tolerances=tolerances,
        max_dense_vertices=raw.get("max_dense_vertices"),
        curvature_restarts=raw.get("curvature_restarts"),
        curvature_max_evaluations=raw.get("curvature_max_evaluations"),
        threads=raw.get("threads"),
    )


def _load_config() -> DggKitConfig:
    """
    Load configuration from disk into a DggKitConfig.

    On any error (missing file, parse error) the defaults apply.
    """
    path = _find_config_file()
    if not path:
        return DggKitConfig()

    if path.endswith((".yml", ".yaml")):
        raw = _load_yaml_with_fallback(path)
    else:
        raw = _load_json(path)

    return config_from_mapping(raw)


# Single shared config instance used by helpers below.
_CONFIG: DggKitConfig = _load_config()


# ======================================================================
# Public helper functions
# ======================================================================

def get_tolerance(name: str) -> float:
    """
    Return the configured tolerance `name` (see _DEFAULT_TOLERANCES).
    """
    try:
        return _CONFIG.tolerances[name]
    except KeyError:
        raise KeyError(f"unknown tolerance {name!r}") from None


def get_thread_limit() -> int:
    """
    Worker cap for internal parallelism.

    Precedence:
      1) DGG_KIT_THREADS environment variable, if a positive integer.
      2) `threads` from the config file.
      3) Default: 1.
    """
    env = _as_positive_int(os.environ.get(THREADS_ENV))
    if env is not None:
        return env
    return _CONFIG.threads


def get_max_dense_vertices() -> int:
    return _CONFIG.max_dense_vertices


def get_curvature_defaults() -> Dict[str, int]:
    return {
        "restarts": _CONFIG.curvature_restarts,
        "max_evaluations": _CONFIG.curvature_max_evaluations,
    }
