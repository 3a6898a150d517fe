"""Domain types shared by the simulator, the analysis and the oracles.

An :class:`EventLog` is stored column-wise (one numpy array per CSV column)
because realistic runs hold millions of trials.  The per-trial view
(:class:`Trial`, :class:`StationRecord`) is materialized on demand.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping

import numpy as np

TWO_PI = 2.0 * math.pi

LABELS = ("a", "b", "c", "d")
LABEL_CODE = {label: i for i, label in enumerate(LABELS)}
SIDES = ("left", "right")

THREE_SETTING = "three_setting"
FOUR_SETTING = "four_setting"
PROTOCOL_PAIRS: dict[str, tuple[tuple[str, str], ...]] = {
    THREE_SETTING: (("a", "b"), ("a", "c"), ("b", "c")),
    FOUR_SETTING: (("a", "b"), ("a", "d"), ("c", "b"), ("c", "d")),
}


def normalize_angle(angle: float) -> float:
    """Map ``angle`` into [0, 2pi)."""
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle!r}")
    r = angle % TWO_PI
    # -tiny % 2pi rounds to exactly 2pi
    return 0.0 if r >= TWO_PI else r


def normalize_angles(angles: np.ndarray) -> np.ndarray:
    r = np.mod(angles, TWO_PI)
    r[r >= TWO_PI] = 0.0
    return r


@dataclass(frozen=True)
class Setting:
    label: str
    angle: float
    side: str = "left"

    def __post_init__(self):
        if self.label not in LABEL_CODE:
            raise ValueError(f"unknown setting label {self.label!r}")
        if self.side not in SIDES:
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        object.__setattr__(self, "angle", normalize_angle(float(self.angle)))


@dataclass(frozen=True)
class PairState:
    """Hidden state of one emitted pair: the elementary draw of a trial."""

    lam: float
    aux: tuple[float, ...] = ()
    emission_tick: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lam", normalize_angle(float(self.lam)))
        object.__setattr__(self, "aux", tuple(float(x) for x in self.aux))
        if self.emission_tick < 0:
            raise ValueError("emission_tick must be non-negative")


@dataclass(frozen=True)
class StationRecord:
    setting_label: str
    time_tick: int
    outcome: int
    delay: float | None = None


@dataclass(frozen=True)
class Trial:
    n: int
    left: StationRecord
    right: StationRecord

    @property
    def pair(self) -> tuple[str, str]:
        return (self.left.setting_label, self.right.setting_label)

    @property
    def product(self) -> int:
        return self.left.outcome * self.right.outcome


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    count: int
    std_error: float

    @classmethod
    def from_sum(cls, total: int, count: int) -> "CorrelationEstimate":
        if count == 0:
            return cls(0.0, 0, 0.0)
        value = total / count
        return cls(value, count, math.sqrt(max(0.0, 1.0 - value * value) / count))

    @property
    def empty(self) -> bool:
        return self.count == 0


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


def settings_table_from(angles: Mapping[str, float] | Mapping[str, Mapping[str, float]]) -> dict:
    """Build a per-side table from either ``{label: angle}`` or ``{side: {label: angle}}``."""
    if angles and all(k in SIDES for k in angles):
        table = {side: dict(angles.get(side, {})) for side in SIDES}
    else:
        table = {side: dict(angles) for side in SIDES}
    return {
        side: {label: normalize_angle(float(v)) for label, v in sorted(table[side].items())}
        for side in SIDES
    }


@dataclass(frozen=True, eq=False)
class EventLog:
    """Ordered trial sequence of one experiment run, stored by column.

    Setting columns hold label codes (indices into :data:`LABELS`).  Delay
    columns are ``None`` when the model produces no detection delays;
    individual absent delays inside a present column are NaN.
    """

    n: np.ndarray
    t_left: np.ndarray
    setting_left: np.ndarray
    outcome_left: np.ndarray
    t_right: np.ndarray
    setting_right: np.ndarray
    outcome_right: np.ndarray
    delay_left: np.ndarray | None = None
    delay_right: np.ndarray | None = None
    settings_table: dict = field(default_factory=lambda: {s: {} for s in SIDES})
    protocol: str = THREE_SETTING
    model_id: str = ""
    seed: int = 0
    retained_fraction: float = 1.0

    def __post_init__(self):
        ints = ("n", "t_left", "t_right")
        codes = ("setting_left", "setting_right", "outcome_left", "outcome_right")
        for name in ints:
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int64))
        for name in codes:
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int8))
        for name in ("delay_left", "delay_right"):
            if getattr(self, name) is not None:
                col = _frozen(getattr(self, name), np.float64)
                # a column with no delay at all is the same as no column
                object.__setattr__(self, name, None if np.isnan(col).all() else col)
        lengths = {len(getattr(self, name)) for name in ints + codes}
        lengths |= {len(d) for d in (self.delay_left, self.delay_right) if d is not None}
        if len(lengths) > 1:
            raise ValueError(f"column lengths differ: {sorted(lengths)}")
        object.__setattr__(self, "settings_table", settings_table_from(self.settings_table))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def M(self) -> int:
        return len(self.n)

    def __len__(self) -> int:
        return self.M

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        for name in ("n", "t_left", "setting_left", "outcome_left",
                     "t_right", "setting_right", "outcome_right"):
            if not np.array_equal(getattr(self, name), getattr(other, name)):
                return False
        for name in ("delay_left", "delay_right"):
            a, b = getattr(self, name), getattr(other, name)
            if (a is None) != (b is None):
                return False
            if a is not None and not np.array_equal(a, b, equal_nan=True):
                return False
        return (
            self.settings_table == other.settings_table
            and self.protocol == other.protocol
            and self.model_id == other.model_id
            and self.seed == other.seed
            and self.retained_fraction == other.retained_fraction
        )

    __hash__ = None

    @property
    def has_delays(self) -> bool:
        return self.delay_left is not None and self.delay_right is not None

    @cached_property
    def products(self) -> np.ndarray:
        prod = self.outcome_left.astype(np.int64) * self.outcome_right
        prod.flags.writeable = False
        return prod

    def pair_mask(self, pair: tuple[str, str]) -> np.ndarray:
        left, right = pair
        return (self.setting_left == LABEL_CODE[left]) & (self.setting_right == LABEL_CODE[right])

    @property
    def pair_counts(self) -> dict[tuple[str, str], int]:
        """Number of trials per (left label, right label) pair that occurs."""
        codes = self.setting_left.astype(np.int64) * len(LABELS) + self.setting_right
        counts = np.bincount(codes, minlength=len(LABELS) ** 2)
        return {
            (LABELS[i // len(LABELS)], LABELS[i % len(LABELS)]): int(c)
            for i, c in enumerate(counts)
            if c
        }

    def subset(self, mask: np.ndarray, **changes) -> "EventLog":
        """Trials where ``mask`` holds, renumbered 1..K; ticks are kept."""
        mask = np.asarray(mask, dtype=bool)
        kept = int(mask.sum())

        def pick(a):
            return None if a is None else a[mask]

        kwargs = dict(
            n=np.arange(1, kept + 1),
            t_left=self.t_left[mask],
            setting_left=self.setting_left[mask],
            outcome_left=self.outcome_left[mask],
            t_right=self.t_right[mask],
            setting_right=self.setting_right[mask],
            outcome_right=self.outcome_right[mask],
            delay_left=pick(self.delay_left),
            delay_right=pick(self.delay_right),
            settings_table=self.settings_table,
            protocol=self.protocol,
            model_id=self.model_id,
            seed=self.seed,
            retained_fraction=self.retained_fraction,
        )
        kwargs.update(changes)
        return EventLog(**kwargs)

    def permuted(self, order: np.ndarray) -> "EventLog":
        """Same trials in a different order (indices and ticks travel with the trial)."""
        order = np.asarray(order)

        def take(a):
            return None if a is None else a[order]

        return EventLog(
            n=self.n[order], t_left=self.t_left[order],
            setting_left=self.setting_left[order], outcome_left=self.outcome_left[order],
            t_right=self.t_right[order], setting_right=self.setting_right[order],
            outcome_right=self.outcome_right[order],
            delay_left=take(self.delay_left), delay_right=take(self.delay_right),
            settings_table=self.settings_table, protocol=self.protocol,
            model_id=self.model_id, seed=self.seed,
            retained_fraction=self.retained_fraction,
        )

    def trial(self, i: int) -> Trial:
        """Trial at zero-based position ``i``."""

        def record(side: str) -> StationRecord:
            delays = getattr(self, f"delay_{side}")
            delay = None
            if delays is not None and not math.isnan(delays[i]):
                delay = float(delays[i])
            return StationRecord(
                setting_label=LABELS[getattr(self, f"setting_{side}")[i]],
                time_tick=int(getattr(self, f"t_{side}")[i]),
                outcome=int(getattr(self, f"outcome_{side}")[i]),
                delay=delay,
            )

        return Trial(int(self.n[i]), record("left"), record("right"))

    @property
    def trials(self) -> Iterator[Trial]:
        return (self.trial(i) for i in range(self.M))

    @classmethod
    def from_trials(cls, trials, **meta) -> "EventLog":
        trials = list(trials)

        def delays(side):
            return [math.nan if getattr(t, side).delay is None else getattr(t, side).delay for t in trials]

        return cls(
            n=[t.n for t in trials],
            t_left=[t.left.time_tick for t in trials],
            setting_left=[LABEL_CODE[t.left.setting_label] for t in trials],
            outcome_left=[t.left.outcome for t in trials],
            t_right=[t.right.time_tick for t in trials],
            setting_right=[LABEL_CODE[t.right.setting_label] for t in trials],
            outcome_right=[t.right.outcome for t in trials],
            delay_left=delays("left"),
            delay_right=delays("right"),
            **meta,
        )


@dataclass(frozen=True)
class Violation:
    rule: str
    trial: int | None
    message: str

    def __str__(self) -> str:
        where = "" if self.trial is None else f" (trial {self.trial})"
        return f"{self.rule}{where}: {self.message}"


def validate_log(log: EventLog) -> list[Violation]:
    """Check every EventLog invariant; an empty list means the log is valid.

    Violations are reported, never raised.  Trial numbers in the report are
    the log's own ``n`` values.
    """
    out: list[Violation] = []
    M = log.M

    for side in SIDES:
        for label, angle in log.settings_table[side].items():
            if not (math.isfinite(angle) and 0.0 <= angle < TWO_PI):
                out.append(Violation("angle", None, f"{side} angle for {label!r} not in [0, 2pi)"))

    if M == 0:
        return out

    expected = np.arange(1, M + 1)
    bad = np.flatnonzero(log.n != expected)
    if bad.size:
        i = int(bad[0])
        out.append(Violation("index", int(log.n[i]),
                             f"trial indices must be 1..M consecutive; position {i + 1} holds {int(log.n[i])}"))

    for side in SIDES:
        outcomes = getattr(log, f"outcome_{side}")
        for i in np.flatnonzero((outcomes != 1) & (outcomes != -1)):
            out.append(Violation("outcome", int(log.n[i]), f"{side} outcome {int(outcomes[i])} is not -1 or +1"))

        ticks = getattr(log, f"t_{side}")
        settings = getattr(log, f"setting_{side}")
        for i in np.flatnonzero(ticks < 0):
            out.append(Violation("tick-order", int(log.n[i]), f"{side} tick {int(ticks[i])} is negative"))
        for i in np.flatnonzero(np.diff(ticks) < 0) + 1:
            out.append(Violation("tick-order", int(log.n[i]),
                                 f"{side} tick {int(ticks[i])} precedes previous tick {int(ticks[i - 1])}"))
        # ticks shared by several trials
        seen: dict[int, list[int]] = {}
        increasing = bool(np.all(np.diff(ticks) > 0))
        dup_ticks = [] if increasing else [t for t, c in Counter(ticks.tolist()).items() if c > 1]
        if dup_ticks:
            dup = set(dup_ticks)
            for i, t in enumerate(ticks.tolist()):
                if t in dup:
                    seen.setdefault(t, []).append(i)
            for t, idx in seen.items():
                labels = {LABELS[settings[i]] for i in idx}
                first_repeat = int(log.n[idx[1]])
                if len(labels) > 1:
                    out.append(Violation(
                        "single-setting-per-time", first_repeat,
                        f"{side} tick {t} carries settings {sorted(labels)}; only one setting can occur at one time",
                    ))
                else:
                    out.append(Violation("duplicate-tick", first_repeat,
                                         f"{side} tick {t} is used by {len(idx)} trials"))

        table = log.settings_table[side]
        for code in np.unique(settings):
            if not 0 <= code < len(LABELS) or LABELS[code] not in table:
                i = int(np.flatnonzero(settings == code)[0])
                name = LABELS[code] if 0 <= code < len(LABELS) else str(int(code))
                out.append(Violation("unknown-label", int(log.n[i]),
                                     f"{side} setting {name!r} missing from the settings table"))

        delays = getattr(log, f"delay_{side}")
        if delays is not None:
            present = ~np.isnan(delays)
            for i in np.flatnonzero(present & ~((delays >= 0) & np.isfinite(delays))):
                out.append(Violation("delay", int(log.n[i]), f"{side} delay {delays[i]!r} is not finite and >= 0"))

    allowed = PROTOCOL_PAIRS.get(log.protocol)
    if allowed is None:
        out.append(Violation("protocol", None, f"unknown protocol {log.protocol!r}"))
    else:
        ok = np.zeros(M, dtype=bool)
        for pair in allowed:
            ok |= log.pair_mask(pair)
        bad = np.flatnonzero(~ok)
        if bad.size:
            i = int(bad[0])
            pair = (LABELS[log.setting_left[i]], LABELS[log.setting_right[i]])
            out.append(Violation("protocol-pair", int(log.n[i]),
                                 f"{bad.size} trial(s) use pairs outside {log.protocol}, first {pair}"))
    if sum(log.pair_counts.values()) != M:
        out.append(Violation("pair-counts", None, "pair counts do not sum to M"))
    return out
