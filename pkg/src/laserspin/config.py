"""JSON run configuration for the command-line tool.

A config is one JSON object with ``schema_version`` and optional sections;
unknown keys anywhere are rejected with the dotted path of the offender.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .elliptic import DomainError
from .model import CIRCULAR_EPSILON, ConfigError, PhysicalConfig
from .propagator import IntegratorSpec, StepSizeError

SCHEMA_VERSION = 1

_SECTIONS = {
    "physics": {
        "eta": 0.3,
        "epsilon": 0.0,
        "omega": 1.0,
        "beta_z": 0.0,
        "kappa": 1.0,
        "omega3_uses_omega_prime": False,
    },
    "integrator": {
        "method": "magnus4",
        "steps_per_period": 256,
        "step": None,
        "target_error": None,
    },
    "simulate": {"periods": 1.0, "samples": 256, "initial_state": [[1.0, 0.0], [0.0, 0.0]]},
    "period": {"gamma_power": 1, "max_periods": 10.0},
    "sweep": {
        "eta": [0.0, 0.05, 0.1, 0.2],
        "epsilon": [0.0, CIRCULAR_EPSILON],
        "beta_z": [0.0],
        "gamma_power": 1,
    },
    "phase": {"eta": [0.0, 1e-6, 1e-4, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]},
    "reconcile": {"samples": 64, "tolerance": 1e-9, "steps_per_period": 512},
    "validate": {"tolerances": {}},
}


@dataclass
class RunConfig:
    physics: PhysicalConfig
    integrator: IntegratorSpec
    options: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def section(self, name: str) -> dict:
        return self.options[name]


def _fail(source, path, message):
    raise ConfigError(f"{source}: {path}: {message}")


def _check_real(source, path, value, *, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(source, path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        _fail(source, path, f"expected a finite number, got {value!r}")
    return float(value)


def _merge(source, name, given):
    defaults = _SECTIONS[name]
    if not isinstance(given, dict):
        _fail(source, name, "expected an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        _fail(source, f"{name}.{unknown[0]}", "unknown key")
    merged = dict(defaults)
    merged.update(given)
    return merged


def parse_config(doc, source: str = "<config>") -> RunConfig:
    if not isinstance(doc, dict):
        _fail(source, "<root>", "expected a JSON object")
    unknown = sorted(set(doc) - set(_SECTIONS) - {"schema_version"})
    if unknown:
        _fail(source, unknown[0], "unknown key")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        _fail(source, "schema_version", f"unsupported version {version!r}")

    opts = {name: _merge(source, name, doc.get(name, {})) for name in _SECTIONS}

    phys = opts["physics"]
    values = {}
    for key in ("eta", "epsilon", "omega", "beta_z", "kappa"):
        values[key] = _check_real(source, f"physics.{key}", phys[key])
    if not isinstance(phys["omega3_uses_omega_prime"], bool):
        _fail(source, "physics.omega3_uses_omega_prime", "expected true or false")
    try:
        physics = PhysicalConfig(
            **values, omega3_uses_omega_prime=phys["omega3_uses_omega_prime"]
        )
    except (ConfigError, DomainError) as exc:
        raise ConfigError(f"{source}: physics: {exc}") from None

    integ = opts["integrator"]
    steps = integ["steps_per_period"]
    if isinstance(steps, bool) or not isinstance(steps, int):
        _fail(source, "integrator.steps_per_period", f"expected an integer, got {steps!r}")
    try:
        integrator = IntegratorSpec(
            method=integ["method"],
            steps_per_period=steps,
            step=_check_real(source, "integrator.step", integ["step"], allow_none=True),
            target_error=_check_real(
                source, "integrator.target_error", integ["target_error"], allow_none=True
            ),
        )
    except (ValueError, StepSizeError) as exc:
        raise ConfigError(f"{source}: integrator: {exc}") from None

    for key in ("eta", "epsilon", "beta_z"):
        grid = opts["sweep"][key]
        if not isinstance(grid, list) or not grid:
            _fail(source, f"sweep.{key}", "expected a non-empty list")
        for i, v in enumerate(grid):
            _check_real(source, f"sweep.{key}[{i}]", v)
    for i, v in enumerate(opts["phase"]["eta"]):
        _check_real(source, f"phase.eta[{i}]", v)
    for sec in ("period", "sweep"):
        if opts[sec]["gamma_power"] not in (1, 2):
            _fail(source, f"{sec}.gamma_power", "expected 1 or 2")
    tol = opts["validate"]["tolerances"]
    if not isinstance(tol, dict):
        _fail(source, "validate.tolerances", "expected an object")
    for k, v in tol.items():
        _check_real(source, f"validate.tolerances.{k}", v)
    state = opts["simulate"]["initial_state"]
    try:
        up, down = (complex(float(re), float(im)) for re, im in state)
    except (TypeError, ValueError):
        _fail(source, "simulate.initial_state", "expected [[re, im], [re, im]]")
    if abs(up) ** 2 + abs(down) ** 2 == 0:
        _fail(source, "simulate.initial_state", "zero vector")
    samples = opts["simulate"]["samples"]
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1:
        _fail(source, "simulate.samples", "expected a positive integer")
    if _check_real(source, "simulate.periods", opts["simulate"]["periods"]) <= 0:
        _fail(source, "simulate.periods", "expected > 0")
    return RunConfig(physics=physics, integrator=integrator, options=opts, source=source)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return parse_config({}, "<defaults>")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(doc, str(path))
