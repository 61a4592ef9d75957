"""JSON run configuration: schema, validation and model construction.

Indices in configs and CSV headers are 1-based; the library is 0-based.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .bath import Debye, DiscretizedBath, Ohmic, discretize, DEFAULT_N_MODES
from .dynamics import IntegratorConfig, SpinBosonSystem, default_dt
from .estimators import DEFAULT_BATCH_SIZE
from .mapping import MappingSpace

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "shipped_configs", "SCHEMA"]

_positive = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "required": ["model", "dynamics", "ensemble"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "model": {
            "type": "object",
            "required": ["epsilon", "delta", "spectral_density", "beta"],
            "additionalProperties": False,
            "properties": {
                "epsilon": {"type": "number"},
                "delta": {"type": "number"},
                "n_modes": {"type": "integer", "minimum": 1},
                "beta": {"oneOf": [_positive, {"const": "inf"}]},
                "spectral_density": {
                    "type": "object",
                    "required": ["kind", "omega_c"],
                    "properties": {"kind": {"enum": ["ohmic", "debye"]}, "omega_c": _positive},
                    "oneOf": [
                        {
                            "properties": {"kind": {"const": "ohmic"}, "alpha": {"type": "number", "minimum": 0}},
                            "required": ["alpha"],
                            "not": {"required": ["lambda"]},
                        },
                        {
                            "properties": {"kind": {"const": "debye"}, "lambda": {"type": "number", "minimum": 0}},
                            "required": ["lambda"],
                            "not": {"required": ["alpha"]},
                        },
                    ],
                },
            },
        },
        "mapping": {
            "type": "object",
            "required": ["gamma"],
            "additionalProperties": False,
            "properties": {"F": {"const": 2}, "gamma": {"type": "number"}},
        },
        "dynamics": {
            "type": "object",
            "required": ["t_max"],
            "additionalProperties": False,
            "properties": {
                "dt": _positive,
                "t_max": _positive,
                "record_stride": {"type": "integer", "minimum": 1},
            },
        },
        "ensemble": {
            "type": "object",
            "required": ["n_traj", "seed"],
            "additionalProperties": False,
            "properties": {
                "n_traj": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "batch_size": {"type": "integer", "minimum": 1},
            },
        },
        "method": {"enum": ["ecmm", "ehrenfest"]},
        "initial_state": {"type": "integer", "minimum": 1, "maximum": 2},
        # written by the CLI into run.json; ignored on re-ingest
        "run": {"type": "object"},
    },
    "if": {"properties": {"method": {"const": "ehrenfest"}}, "required": ["method"]},
    "else": {"required": ["mapping"]},
}


class ConfigError(ValueError):
    """Validation failure; the message starts with the offending field path."""


def _path(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    system: SpinBosonSystem
    space: MappingSpace | None
    integrator: IntegratorConfig
    beta: float
    method: str
    initial_state: int      # 0-based
    n_traj: int
    seed: int
    batch_size: int

    def with_overrides(self, *, seed=None, n_traj=None) -> "RunConfig":
        raw = copy.deepcopy(self.raw)
        if seed is not None:
            raw["ensemble"]["seed"] = int(seed)
        if n_traj is not None:
            raw["ensemble"]["n_traj"] = int(n_traj)
        return parse_config(raw)


def _build_bath(model: dict) -> DiscretizedBath:
    sd = model["spectral_density"]
    n_modes = model.get("n_modes", DEFAULT_N_MODES)
    wc = sd["omega_c"]
    if sd["kind"] == "ohmic":
        strength, cls = sd["alpha"], Ohmic
    else:
        strength, cls = sd["lambda"], Debye
    if strength == 0:
        # frequencies do not depend on the coupling strength
        omega = cls(1.0, wc).frequencies(n_modes)
        return DiscretizedBath(omega, np.zeros_like(omega))
    return discretize(cls(strength, wc), n_modes)


def spectral_density(model: dict):
    """The continuous spectral density, or None for a decoupled bath."""
    sd = model["spectral_density"]
    if sd["kind"] == "ohmic":
        return Ohmic(sd["alpha"], sd["omega_c"]) if sd["alpha"] > 0 else None
    return Debye(sd["lambda"], sd["omega_c"]) if sd["lambda"] > 0 else None


def validate(raw: dict):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(e.absolute_path), _path(e)))
    if errors:
        e = max(errors, key=lambda e: len(e.absolute_path))
        raise ConfigError(f"{_path(e)}: {e.message}")


def parse_config(raw: dict) -> RunConfig:
    raw = copy.deepcopy(raw)
    raw.pop("run", None)
    validate(raw)
    model = raw["model"]
    method = raw.get("method", "ecmm")
    bath = _build_bath(model)
    system = SpinBosonSystem(float(model["epsilon"]), float(model["delta"]), bath)

    space = None
    if method == "ecmm":
        F = raw["mapping"].get("F", 2)
        gamma = raw["mapping"]["gamma"]
        if not gamma > -1.0 / F:
            raise ConfigError(f"mapping.gamma: {gamma} must exceed -1/F = {-1.0 / F}")
        space = MappingSpace(F, float(gamma))

    dyn = raw["dynamics"]
    dt = dyn.get("dt", default_dt(system))
    try:
        integrator = IntegratorConfig(float(dt), float(dyn["t_max"]), int(dyn.get("record_stride", 1)))
    except ValueError as exc:
        raise ConfigError(f"dynamics: {exc}") from None
    beta = math.inf if model["beta"] == "inf" else float(model["beta"])
    ens = raw["ensemble"]
    return RunConfig(
        raw=raw,
        system=system,
        space=space,
        integrator=integrator,
        beta=beta,
        method=method,
        initial_state=raw.get("initial_state", 1) - 1,
        n_traj=int(ens["n_traj"]),
        seed=int(ens["seed"]),
        batch_size=int(ens.get("batch_size", DEFAULT_BATCH_SIZE)),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: invalid JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<root>: top level must be an object")
    return parse_config(raw)


def shipped_configs() -> list:
    """Paths of the example configs bundled with the package."""
    root = resources.files("ecmm") / "configs"
    return sorted(p for p in root.iterdir() if p.name.endswith(".json"))
