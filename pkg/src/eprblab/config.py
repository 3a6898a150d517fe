"""Run configuration files.

INI syntax, parsed with :mod:`configparser`.  Angles are in degrees and are
converted to radians when the :class:`~eprblab.runner.RunConfig` is built.
Unknown sections and keys are errors::

    [experiment]
    protocol = three_setting        ; three_setting | four_setting
    trials = 10000
    seed = 1
    pair_probabilities = 1/3, 1/3, 1/3   ; optional, default uniform
    right_jitter = 0                ; extra integer ticks on the right clock

    [source]
    lambda = uniform                ; uniform | fixed
    lambda_deg = 0                  ; value for lambda = fixed
    aux_dimension = 0
    partner_offset_deg = 0          ; right particle sees lambda + offset

    [station]
    kind = static                   ; static | dynamic | timetag | singlet
    periodicity = 1                 ; 1 or 2 (default 2 for timetag)
    drift_rate_deg = 0              ; degrees per tick, dynamic only
    delay_scale = 1.0               ; T0, timetag only
    delay_exponent = 4              ; d, timetag only

    [settings]                      ; label = angle in degrees, both sides
    a = 0
    b = 120
    c = 180

Optional ``[settings.left]`` / ``[settings.right]`` sections override the
shared table for one side.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path

from .core import LABELS, SIDES
from .models import SourceConfig, StationConfig
from .runner import ConfigError, Protocol, RunConfig

SCHEMA: dict[str, dict[str, type]] = {
    "experiment": {
        "protocol": str,
        "trials": int,
        "seed": int,
        "pair_probabilities": list,
        "right_jitter": int,
    },
    "source": {
        "lambda": str,
        "lambda_deg": float,
        "aux_dimension": int,
        "partner_offset_deg": float,
    },
    "station": {
        "kind": str,
        "periodicity": int,
        "drift_rate_deg": float,
        "delay_scale": float,
        "delay_exponent": float,
    },
    "settings": {label: float for label in LABELS},
    "settings.left": {label: float for label in LABELS},
    "settings.right": {label: float for label in LABELS},
}

DEFAULTS = {
    "experiment": {"protocol": "three_setting", "trials": 1000, "seed": 0,
                   "pair_probabilities": None, "right_jitter": 0},
    "source": {"lambda": "uniform", "lambda_deg": 0.0, "aux_dimension": 0, "partner_offset_deg": 0.0},
    "station": {"kind": "static", "periodicity": None, "drift_rate_deg": 0.0,
                "delay_scale": 1.0, "delay_exponent": 4.0},
}
_PROTOCOL_ALIASES = {"3-setting": "three_setting", "4-setting": "four_setting"}


def _convert(section: str, key: str, text: str):
    kind = SCHEMA[section][key]
    try:
        if kind is int:
            return int(text)
        if kind is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind is list:
            return [float(Fraction(x.strip())) for x in text.split(",") if x.strip()]
        return text.strip()
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"[{section}] {key} = {text!r}: expected {kind.__name__}") from None


def _locate(key: str) -> tuple[str, str]:
    if "." in key:
        section, _, name = key.rpartition(".")
    else:
        hits = [s for s, keys in SCHEMA.items() if key in keys and not s.startswith("settings.")]
        if len(hits) != 1:
            raise ConfigError(f"unknown config key {key!r}")
        section, name = hits[0], key
    if section not in SCHEMA or name not in SCHEMA[section]:
        raise ConfigError(f"unknown config key {key!r}")
    return section, name


def parse_config(text: str, overrides=(), seed: int | None = None) -> dict:
    """Resolve config text plus ``key=value`` overrides into a plain dict."""
    parser = configparser.ConfigParser(
        inline_comment_prefixes=(";", "#"), interpolation=None, default_section="__none__"
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    raw: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key {key!r} in [{section}]")
            raw.setdefault(section, {})[key] = _convert(section, key, value)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} must look like key=value")
        section, name = _locate(key.strip())
        raw.setdefault(section, {})[name] = _convert(section, name, value)

    resolved = {s: {**DEFAULTS[s], **raw.get(s, {})} for s in DEFAULTS}
    if seed is not None:
        resolved["experiment"]["seed"] = int(seed)
    proto = resolved["experiment"]["protocol"]
    resolved["experiment"]["protocol"] = _PROTOCOL_ALIASES.get(proto, proto)
    shared = raw.get("settings", {})
    resolved["settings"] = {
        side: dict(sorted({**shared, **raw.get(f"settings.{side}", {})}.items())) for side in SIDES
    }
    build_run_config(resolved)  # validate now, so errors name the first violated constraint
    return resolved


def load_config(path, overrides=(), seed: int | None = None) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, overrides, seed)


def build_run_config(resolved: dict) -> RunConfig:
    exp, src, st = resolved["experiment"], resolved["source"], resolved["station"]
    try:
        probs = exp["pair_probabilities"]
        return RunConfig(
            protocol=Protocol(exp["protocol"], tuple(probs) if probs else None),
            trials=exp["trials"],
            source=SourceConfig(
                lambda_distribution=src["lambda"],
                lambda_value=math.radians(src["lambda_deg"]),
                aux_dimension=src["aux_dimension"],
                partner_offset=math.radians(src["partner_offset_deg"]),
            ),
            station=StationConfig(
                kind=st["kind"],
                periodicity=st["periodicity"],
                drift_rate=math.radians(st["drift_rate_deg"]),
                delay_scale=st["delay_scale"],
                delay_exponent=st["delay_exponent"],
            ),
            seed=exp["seed"],
            settings_table={
                side: {k: math.radians(v) for k, v in resolved["settings"][side].items()} for side in SIDES
            },
            right_jitter=exp["right_jitter"],
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_digest(resolved: dict) -> str:
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
