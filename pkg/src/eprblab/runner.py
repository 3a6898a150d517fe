"""Experiment orchestration: setting schedule, station clocks, log assembly."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    FOUR_SETTING,
    LABEL_CODE,
    LABELS,
    PROTOCOL_PAIRS,
    SIDES,
    THREE_SETTING,
    EventLog,
    settings_table_from,
)
from .models import (
    SourceConfig,
    StationConfig,
    draw_lambdas,
    dynamic_outcome,
    particle_angle,
    singlet_outcomes,
    static_outcome,
    timetag_delay,
)
from .streams import Stream

CHUNK = 1 << 16


class ConfigError(ValueError):
    """A run configuration violates a constraint."""


@dataclass(frozen=True)
class Protocol:
    mode: str = THREE_SETTING
    pair_probabilities: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.mode not in PROTOCOL_PAIRS:
            raise ConfigError(f"protocol mode must be one of {sorted(PROTOCOL_PAIRS)}, got {self.mode!r}")
        k = len(PROTOCOL_PAIRS[self.mode])
        probs = self.pair_probabilities
        probs = (1.0 / k,) * k if probs is None else tuple(float(x) for x in probs)
        if len(probs) != k:
            raise ConfigError(f"{self.mode} needs {k} pair probabilities, got {len(probs)}")
        if any(not math.isfinite(x) or x < 0 for x in probs):
            raise ConfigError("pair probabilities must be finite and non-negative")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ConfigError(f"pair probabilities must sum to 1, got {sum(probs)!r}")
        object.__setattr__(self, "pair_probabilities", probs)

    @property
    def setting_pairs(self) -> tuple[tuple[str, str], ...]:
        return PROTOCOL_PAIRS[self.mode]

    @classmethod
    def three_setting(cls, probabilities=None) -> "Protocol":
        return cls(THREE_SETTING, probabilities)

    @classmethod
    def four_setting(cls, probabilities=None) -> "Protocol":
        return cls(FOUR_SETTING, probabilities)


@dataclass(frozen=True)
class RunConfig:
    protocol: Protocol = field(default_factory=Protocol)
    trials: int = 1000
    source: SourceConfig = field(default_factory=SourceConfig)
    station: StationConfig = field(default_factory=StationConfig)
    seed: int = 0
    settings_table: dict = field(default_factory=dict)
    right_jitter: int = 0

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.right_jitter < 0:
            raise ConfigError("right_jitter must be >= 0")
        object.__setattr__(self, "settings_table", settings_table_from(self.settings_table))
        for side in SIDES:
            needed = {pair[SIDES.index(side)] for pair in self.protocol.setting_pairs}
            missing = sorted(needed - set(self.settings_table[side]))
            if missing:
                raise ConfigError(f"settings table lacks {side} label(s) {missing} used by {self.protocol.mode}")

    @property
    def model_id(self) -> str:
        st = self.station
        if st.kind == "dynamic":
            return f"dynamic(p={st.periodicity},drift={st.drift_rate!r})"
        if st.kind == "timetag":
            return f"timetag(p={st.periodicity},T0={st.delay_scale!r},d={st.delay_exponent!r})"
        return f"{st.kind}(p={st.periodicity})"


def _schedule_codes(protocol: Protocol, index: np.ndarray, seed: int) -> np.ndarray:
    cum = np.cumsum(protocol.pair_probabilities)
    cum[-1] = 1.0
    u = Stream(seed, "schedule").uniform(index, 0)
    return np.searchsorted(cum, u, side="right")


def schedule_settings(protocol: Protocol, M: int, seed: int) -> list[tuple[str, str]]:
    """Random setting pair of each trial 1..M."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    codes = _schedule_codes(protocol, np.arange(1, M + 1), seed)
    pairs = protocol.setting_pairs
    return [pairs[i] for i in codes]


def _angle_lut(table: dict) -> np.ndarray:
    lut = np.full(len(LABELS), np.nan)
    for label, angle in table.items():
        lut[LABEL_CODE[label]] = angle
    return lut


def simulate(cfg: RunConfig, index: np.ndarray, left_codes: np.ndarray,
             right_codes: np.ndarray) -> dict[str, np.ndarray]:
    """Station columns for trials ``index`` under an explicit setting schedule.

    Each station's columns depend only on its own settings, its own clock,
    the pair state and its own random stream.
    """
    index = np.asarray(index, dtype=np.int64)
    st, src, seed = cfg.station, cfg.source, cfg.seed
    p = st.periodicity
    J = cfg.right_jitter
    t_left = index.copy()
    if J:
        t_right = index * (J + 1) + np.floor(Stream(seed, "clock").uniform(index) * (J + 1)).astype(np.int64)
    else:
        t_right = index.copy()
    ticks = {"left": t_left, "right": t_right}
    codes = {"left": np.asarray(left_codes), "right": np.asarray(right_codes)}
    angles = {side: _angle_lut(cfg.settings_table[side])[codes[side]] for side in SIDES}
    cols: dict[str, np.ndarray] = {"n": index}
    for side in SIDES:
        cols[f"t_{side}"] = ticks[side]
        cols[f"setting_{side}"] = codes[side].astype(np.int8)

    if st.kind == "singlet":
        pair = Stream(seed, "pair")
        cols["outcome_left"], cols["outcome_right"] = singlet_outcomes(
            angles["left"], angles["right"], p, pair.uniform(index, 0), pair.uniform(index, 1)
        )
        return cols

    lam = draw_lambdas(src, index, seed)
    for side in SIDES:
        local = particle_angle(lam, side, src)
        if st.kind == "static":
            out = static_outcome(angles[side], local, p)
        elif st.kind == "dynamic":
            out = dynamic_outcome(angles[side], local, ticks[side], p, st.drift_rate, side)
        else:
            out = static_outcome(angles[side], local, p)
            r = Stream(seed, side).uniform(index, 0)
            cols[f"delay_{side}"] = timetag_delay(angles[side], local, r, p, st.delay_scale, st.delay_exponent)
        cols[f"outcome_{side}"] = out
    return cols


def _chunk(cfg: RunConfig, lo: int, hi: int) -> dict[str, np.ndarray]:
    index = np.arange(lo, hi, dtype=np.int64)
    pair_idx = _schedule_codes(cfg.protocol, index, cfg.seed)
    pairs = cfg.protocol.setting_pairs
    left = np.array([LABEL_CODE[a] for a, _ in pairs], dtype=np.int8)[pair_idx]
    right = np.array([LABEL_CODE[b] for _, b in pairs], dtype=np.int8)[pair_idx]
    return simulate(cfg, index, left, right)


def run_experiment(cfg: RunConfig, workers: int = 1) -> EventLog:
    """Simulate ``cfg.trials`` trials; trial n is measured at left tick n.

    The output does not depend on ``workers``.
    """
    M = int(cfg.trials)
    bounds = [(lo, min(lo + CHUNK, M + 1)) for lo in range(1, M + 1, CHUNK)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _chunk(cfg, *b), bounds))
    else:
        parts = [_chunk(cfg, *b) for b in bounds]
    cols = {k: np.concatenate([part[k] for part in parts]) for k in parts[0]}
    return EventLog(
        **cols,
        settings_table=cfg.settings_table,
        protocol=cfg.protocol.mode,
        model_id=cfg.model_id,
        seed=cfg.seed,
    )
