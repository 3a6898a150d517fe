"""Source and station models.

Station kernels (``*_outcome`` / ``timetag_delay``) are vectorized over
trials and take only local inputs: the station's own analyzer angle, the
particle's hidden angle, the station's own clock tick and its own random
stream.  None of them has a parameter through which the remote setting
could enter.  The per-trial functions ``static_station``,
``dynamic_station`` and ``timetag_station`` wrap the kernels for single
trials.

``singlet_reference_sample`` is the exception: it reads both settings and
is used only as a generator of quantum-target data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PairState, Setting, normalize_angle, normalize_angles
from .streams import Stream, TrialStream

STATION_KINDS = ("static", "dynamic", "timetag", "singlet")


@dataclass(frozen=True)
class SourceConfig:
    """Distribution of the hidden angle carried by each pair.

    ``partner_offset`` rotates the right-hand particle relative to the left
    one: the right station sees ``lam + partner_offset``.  Use ``pi / p`` for
    sources emitting opposite (orthogonally polarized) partners.
    """

    lambda_distribution: str = "uniform"
    lambda_value: float = 0.0
    aux_dimension: int = 0
    partner_offset: float = 0.0

    def __post_init__(self):
        if self.lambda_distribution not in ("uniform", "fixed"):
            raise ValueError(f"lambda_distribution must be 'uniform' or 'fixed', got {self.lambda_distribution!r}")
        if not 0 <= self.aux_dimension <= 8:
            raise ValueError("aux_dimension must be in 0..8")
        object.__setattr__(self, "lambda_value", normalize_angle(float(self.lambda_value)))
        object.__setattr__(self, "partner_offset", normalize_angle(float(self.partner_offset)))


@dataclass(frozen=True)
class StationConfig:
    kind: str = "static"
    periodicity: int | None = None
    drift_rate: float = 0.0
    delay_scale: float = 1.0
    delay_exponent: float = 4.0

    def __post_init__(self):
        if self.kind not in STATION_KINDS:
            raise ValueError(f"station kind must be one of {STATION_KINDS}, got {self.kind!r}")
        if self.periodicity is None:
            object.__setattr__(self, "periodicity", 2 if self.kind == "timetag" else 1)
        if self.periodicity not in (1, 2):
            raise ValueError(f"periodicity must be 1 or 2, got {self.periodicity!r}")
        if not math.isfinite(self.drift_rate):
            raise ValueError("drift_rate must be finite")
        if not (self.delay_scale > 0 and math.isfinite(self.delay_scale)):
            raise ValueError("delay_scale must be positive")
        if not (self.delay_exponent > 0 and math.isfinite(self.delay_exponent)):
            raise ValueError("delay_exponent must be positive")


# -- source -----------------------------------------------------------------

def draw_lambdas(cfg: SourceConfig, index, seed: int) -> np.ndarray:
    index = np.asarray(index, dtype=np.int64)
    if cfg.lambda_distribution == "fixed":
        return np.full(index.shape, cfg.lambda_value)
    return normalize_angles(Stream(seed, "source").uniform(index, 0) * (2.0 * math.pi))


def draw_pair_state(cfg: SourceConfig, trial_index: int, seed: int) -> PairState:
    if trial_index < 1:
        raise ValueError(f"trial_index must be >= 1, got {trial_index}")
    lam = float(draw_lambdas(cfg, [trial_index], seed)[0])
    source = Stream(seed, "source")
    aux = tuple(source.uniform(trial_index, 1 + k) for k in range(cfg.aux_dimension))
    return PairState(lam=lam, aux=aux, emission_tick=trial_index)


def particle_angle(lam, side: str, cfg: SourceConfig):
    """Hidden angle seen by the particle travelling to ``side``."""
    if side == "right" and cfg.partner_offset:
        return lam + cfg.partner_offset
    return lam


# -- station kernels --------------------------------------------------------

def _sign(x: np.ndarray) -> np.ndarray:
    out = (x >= 0).view(np.int8) * np.int8(2)
    out -= np.int8(1)
    return out


def static_outcome(angle, lam, p: int) -> np.ndarray:
    """sign(cos(p * (angle - lam))), with sign(0) = +1."""
    return _sign(np.cos(p * (np.asarray(angle) - np.asarray(lam))))


def dynamic_outcome(angle, lam, tick, p: int, drift_rate: float, side: str) -> np.ndarray:
    # drift acts on the right station only; a shared drift would cancel in angle differences
    shift = drift_rate * np.asarray(tick, dtype=np.float64) if side == "right" else 0.0
    return _sign(np.cos(p * (np.asarray(angle) - np.asarray(lam) + shift)))


def timetag_delay(angle, lam, r, p: int, delay_scale: float, delay_exponent: float) -> np.ndarray:
    """T0 * r * |sin(p * (angle - lam))| ** d."""
    s = np.abs(np.sin(p * (np.asarray(angle) - np.asarray(lam))))
    return delay_scale * np.asarray(r) * s**delay_exponent


def singlet_outcomes(left_angle, right_angle, p: int, u_left, u_equal) -> tuple[np.ndarray, np.ndarray]:
    """Joint sample with uniform marginals and E = -cos(p * (left - right))."""
    corr = -np.cos(p * (np.asarray(left_angle) - np.asarray(right_angle)))
    left = np.where(np.asarray(u_left) < 0.5, 1, -1).astype(np.int8)
    equal = np.asarray(u_equal) < (1.0 + corr) / 2.0
    right = np.where(equal, left, -left).astype(np.int8)
    return left, right


# -- per-trial station functions --------------------------------------------

def static_station(setting: Setting, state: PairState, p: int = 1) -> int:
    return int(static_outcome(setting.angle, state.lam, p))


def dynamic_station(setting: Setting, state: PairState, t: int, cfg: StationConfig) -> int:
    if cfg.kind != "dynamic":
        raise ValueError("dynamic_station needs a dynamic StationConfig")
    return int(dynamic_outcome(setting.angle, state.lam, t, cfg.periodicity, cfg.drift_rate, setting.side))


def timetag_station(setting: Setting, state: PairState, cfg: StationConfig,
                    stream: TrialStream) -> tuple[int, float]:
    if cfg.kind != "timetag":
        raise ValueError("timetag_station needs a timetag StationConfig")
    p = cfg.periodicity
    r = stream.uniform(0)
    outcome = int(static_outcome(setting.angle, state.lam, p))
    delay = float(timetag_delay(setting.angle, state.lam, r, p, cfg.delay_scale, cfg.delay_exponent))
    return outcome, delay


def singlet_reference_sample(left: Setting, right: Setting, p: int,
                             stream: TrialStream) -> tuple[int, int]:
    a, b = singlet_outcomes(left.angle, right.angle, p, stream.uniform(0), stream.uniform(1))
    return int(a), int(b)
