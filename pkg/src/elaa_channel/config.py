"""Flat ``key = value`` configuration files.

Keys are the fields of :class:`SimulationConfig` and :class:`ScenarioParams`
plus ``carrier_frequency`` (Hz), which sets the wavelength. Blank lines and
``#`` comments are ignored; unknown or repeated keys are errors.
"""

from __future__ import annotations

import dataclasses
import os
import typing
from typing import Any, Mapping

from .harness import SimulationConfig
from .scenario import ScenarioParams, wavelength_from_frequency

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


def _field_types(cls) -> dict[str, Any]:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


_SIM_FIELDS = {k: v for k, v in _field_types(SimulationConfig).items() if k != "scenario"}
_SCENARIO_FIELDS = _field_types(ScenarioParams)


def _coerce(key: str, raw: str, tp) -> Any:
    raw = raw.strip()
    optional = False
    if typing.get_origin(tp) is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        optional = True
        tp = args[0]
    if optional and raw.lower() in {"none", ""}:
        return None
    try:
        if tp is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if tp is int:
            return int(raw)
        if tp is float:
            return float(raw)
        if tp is str:
            return raw.strip("\"'")
        return tp(raw.strip("\"'").lower())
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key!r}: {raw!r}") from exc


def parse_config_text(text: str, source: str = "<string>") -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if key in _SIM_FIELDS:
            values[key] = _coerce(key, raw, _SIM_FIELDS[key])
        elif key in _SCENARIO_FIELDS:
            values[key] = _coerce(key, raw, _SCENARIO_FIELDS[key])
        elif key == "carrier_frequency":
            values[key] = _coerce(key, raw, float)
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    return values


def build_config(values: Mapping[str, Any]) -> SimulationConfig:
    """Assemble a SimulationConfig from a flat mapping of overrides."""
    values = dict(values)
    if "carrier_frequency" in values:
        if "wavelength" in values:
            raise ConfigError("give either carrier_frequency or wavelength, not both")
        values["wavelength"] = wavelength_from_frequency(values.pop("carrier_frequency"))
    unknown = set(values) - set(_SIM_FIELDS) - set(_SCENARIO_FIELDS)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    scenario = {k: v for k, v in values.items() if k in _SCENARIO_FIELDS}
    sim = {k: v for k, v in values.items() if k in _SIM_FIELDS}
    try:
        return SimulationConfig(scenario=ScenarioParams(**scenario), **sim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | os.PathLike, **overrides) -> SimulationConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    values = parse_config_text(text, str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(values)
