"""INI-style key/value configuration.

Example::

    [acuity]
    coefficient = 1.9469
    exponent = 0.3475
    offset = 9.5062

    [scheduler]
    acuity_offset_s = -3

    [bitrate]
    revert_ms = 500

Sections ``acuity`` and ``scheduler`` build the model parameter objects;
``global`` and per-subcommand sections supply CLI defaults. Unknown sections
and keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import fields

from .acuity import AcuityCurve, SchedulerParams


class ConfigError(ValueError):
    pass


MODEL_SECTIONS = {
    "acuity": AcuityCurve,
    "scheduler": SchedulerParams,
}


def read_config(path, allowed_sections=None) -> dict[str, dict[str, str]]:
    """Parse ``path``; with ``allowed_sections`` given, other sections are errors."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str  # keep key case
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {name: dict(parser[name]) for name in parser.sections()}
    if allowed_sections is None:
        return out
    allowed = set(MODEL_SECTIONS) | set(allowed_sections)
    unknown = sorted(set(out) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {unknown}; expected {sorted(allowed)}")
    return out


def _build(cls, values: dict[str, str], section: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"[{section}]: unknown key(s) {unknown}; expected {sorted(known)}")
    try:
        return cls(**{k: float(v) for k, v in values.items()})
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from None


def curve_from_config(cfg: dict) -> AcuityCurve:
    return _build(AcuityCurve, cfg.get("acuity", {}), "acuity")


def scheduler_from_config(cfg: dict) -> SchedulerParams:
    return _build(SchedulerParams, cfg.get("scheduler", {}), "scheduler")


def load_model_params(path):
    """``(AcuityCurve, SchedulerParams)`` from a config file; missing keys keep defaults."""
    cfg = read_config(path)
    return curve_from_config(cfg), scheduler_from_config(cfg)
