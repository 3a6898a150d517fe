"""Statistics computed from event logs.

All sums of outcome products are accumulated as exact integers, so the
results do not depend on trial order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FOUR_SETTING,
    LABELS,
    PROTOCOL_PAIRS,
    SIDES,
    THREE_SETTING,
    CorrelationEstimate,
    EventLog,
)

BELL_PAIRS = PROTOCOL_PAIRS[THREE_SETTING]
CHSH_PAIRS = PROTOCOL_PAIRS[FOUR_SETTING]
EQ3_VALUES = (-3, -1, 1, 3)


class EmptyPairError(LookupError):
    """No trial of the log used the requested setting pair."""

    def __init__(self, pair):
        super().__init__(f"no trials with setting pair {pair}")
        self.pair = tuple(pair)


class Eq3IndexError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"trial {index}: {message}")
        self.index = index


class MissingDelayError(ValueError):
    def __init__(self, trial: int | None):
        where = "log has no delay columns" if trial is None else f"trial {trial} lacks a detection delay"
        super().__init__(where)
        self.trial = trial


def pair_product_sum(log: EventLog, pair: tuple[str, str]) -> int:
    """Sum of left*right outcome products over trials with setting ``pair``."""
    return int(log.products[log.pair_mask(pair)].sum())


def correlation(log: EventLog, pair: tuple[str, str]) -> CorrelationEstimate:
    """Average outcome product for ``pair``.  Raises EmptyPairError when N_pair = 0."""
    mask = log.pair_mask(pair)
    count = int(mask.sum())
    if count == 0:
        raise EmptyPairError(pair)
    return CorrelationEstimate.from_sum(int(log.products[mask].sum()), count)


def _key(pair) -> str:
    return f"{pair[0]}{pair[1]}"


@dataclass(frozen=True)
class BellReport:
    correlations: dict[str, CorrelationEstimate]
    B: float
    std_error: float

    @property
    def bound_satisfied(self) -> bool:
        return self.B <= 1.0


@dataclass(frozen=True)
class ChshReport:
    correlations: dict[str, CorrelationEstimate]
    S: float
    std_error: float

    @property
    def bound_satisfied(self) -> bool:
        return abs(self.S) <= 2.0


def _combine(log: EventLog, pairs, signs):
    est = {_key(p): correlation(log, p) for p in pairs}
    value = sum(s * est[_key(p)].value for p, s in zip(pairs, signs))
    se = math.sqrt(sum(e.std_error**2 for e in est.values()))
    return est, value, se


def bell_statistic(log: EventLog) -> BellReport:
    """B = E(a,b) + E(a,c) - E(b,c) on left*right products."""
    est, B, se = _combine(log, BELL_PAIRS, (1, 1, -1))
    return BellReport(est, B, se)


def chsh_statistic(log: EventLog) -> ChshReport:
    """S = E(a,b) - E(a,d) + E(c,b) + E(c,d)."""
    est, S, se = _combine(log, CHSH_PAIRS, (1, -1, 1, 1))
    return ChshReport(est, S, se)


def _position(log: EventLog, n: int) -> int:
    hit = np.flatnonzero(log.n == n)
    if hit.size != 1:
        raise Eq3IndexError(n, "no such trial" if hit.size == 0 else "trial index is not unique")
    return int(hit[0])


def eq3_expression(log: EventLog, n: int, k: int, m: int) -> int:
    """Time-indexed combination over three different trials.

    Trial ``n`` must use (a,b), ``k`` (a,c) and ``m`` (b,c); the value is
    prod(n) + prod(k) - prod(m).
    """
    if len({n, k, m}) != 3:
        raise Eq3IndexError(n if n in (k, m) else k, "n, k and m must all be different")
    products = log.products
    total = 0
    for idx, pair, sign in zip((n, k, m), BELL_PAIRS, (1, 1, -1)):
        i = _position(log, idx)
        used = (LABELS[log.setting_left[i]], LABELS[log.setting_right[i]])
        if used != pair:
            raise Eq3IndexError(idx, f"expected setting pair {pair}, found {used}")
        total += sign * int(products[i])
    return total


@dataclass(frozen=True)
class Eq3Summary:
    triples: int
    max: int | None
    histogram: dict[int, int]


def eq3_scan(log: EventLog) -> Eq3Summary:
    """Evaluate eq3_expression on disjoint triples formed greedily in trial order.

    The i-th (a,b) trial, the i-th (a,c) trial and the i-th (b,c) trial
    form the i-th triple.
    """
    products = log.products
    streams = [products[log.pair_mask(p)] for p in BELL_PAIRS]
    K = min(len(s) for s in streams)
    values = streams[0][:K] + streams[1][:K] - streams[2][:K]
    counts = {v: int(np.count_nonzero(values == v)) for v in EQ3_VALUES}
    if K == 0:
        return Eq3Summary(0, None, {})
    return Eq3Summary(K, int(values.max()), counts)


@dataclass(frozen=True)
class CoincidenceConfig:
    window: float = math.inf

    def __post_init__(self):
        if not self.window > 0:
            raise ValueError(f"coincidence window must be > 0, got {self.window!r}")


def coincidence_filter(log: EventLog, cfg: CoincidenceConfig | float) -> EventLog:
    """Keep trials whose left and right delays differ by at most the window."""
    window = cfg.window if isinstance(cfg, CoincidenceConfig) else float(cfg)
    if window < 0 or math.isnan(window):
        raise ValueError(f"coincidence window must be >= 0, got {window!r}")
    if not log.has_delays:
        raise MissingDelayError(int(log.n[0]) if log.M else None)
    missing = np.isnan(log.delay_left) | np.isnan(log.delay_right)
    if missing.any():
        raise MissingDelayError(int(log.n[np.flatnonzero(missing)[0]]))
    if math.isinf(window):
        keep = np.ones(log.M, dtype=bool)
    else:
        keep = np.abs(log.delay_left - log.delay_right) <= window
    kept = int(keep.sum())
    fraction = kept / log.M if log.M else 1.0
    if kept == log.M:
        return log
    return log.subset(keep, retained_fraction=log.retained_fraction * fraction)


def marginals(log: EventLog) -> dict[str, dict[str, dict[str, float]]]:
    """Per station and local setting: count and frequencies of +1 and -1."""
    table: dict[str, dict[str, dict[str, float]]] = {}
    for side in SIDES:
        settings = getattr(log, f"setting_{side}")
        outcomes = getattr(log, f"outcome_{side}")
        table[side] = {}
        for code in np.unique(settings):
            sel = outcomes[settings == code]
            plus = int(np.count_nonzero(sel == 1))
            table[side][LABELS[code]] = {
                "count": int(sel.size),
                "plus": plus / sel.size,
                "minus": (sel.size - plus) / sel.size,
            }
    return table


def no_signaling_check(log: EventLog) -> float:
    """Largest change of a station's P(+1 | local setting) across remote settings.

    Zero when no local setting was ever paired with two different remote
    settings.
    """
    gap = 0.0
    for side, other in (("left", "right"), ("right", "left")):
        local = getattr(log, f"setting_{side}")
        remote = getattr(log, f"setting_{other}")
        outcomes = getattr(log, f"outcome_{side}")
        for code in np.unique(local):
            sel = local == code
            freqs = []
            for rcode in np.unique(remote[sel]):
                cond = outcomes[sel & (remote == rcode)]
                freqs.append(np.count_nonzero(cond == 1) / cond.size)
            if len(freqs) > 1:
                gap = max(gap, max(freqs) - min(freqs))
    return float(gap)


def _estimate_json(e: CorrelationEstimate) -> dict:
    return {"value": e.value, "count": e.count, "std_error": e.std_error}


def _statistics(log: EventLog) -> dict:
    out: dict = {"M": log.M, "pair_counts": {_key(p): c for p, c in sorted(log.pair_counts.items())}}
    pairs = PROTOCOL_PAIRS.get(log.protocol, ())
    corr = {}
    for p in pairs:
        try:
            corr[_key(p)] = _estimate_json(correlation(log, p))
        except EmptyPairError:
            corr[_key(p)] = None
    out["correlations"] = corr
    out["B"] = out["S"] = None
    if log.protocol == THREE_SETTING and all(corr.values()):
        bell = bell_statistic(log)
        out["B"] = {"value": bell.B, "std_error": bell.std_error, "bound_satisfied": bell.bound_satisfied}
    if log.protocol == FOUR_SETTING and all(corr.values()):
        chsh = chsh_statistic(log)
        out["S"] = {"value": chsh.S, "std_error": chsh.std_error, "bound_satisfied": chsh.bound_satisfied}
    out["marginals"] = marginals(log)
    out["no_signaling_gap"] = no_signaling_check(log)
    return out


def analysis_report(log: EventLog, window: float | None = None, eq3: bool = False) -> dict:
    """JSON-ready report; see ``eprblab.schemas.ANALYSIS_REPORT``."""
    report = {
        "model_id": log.model_id,
        "seed": log.seed,
        "protocol": log.protocol,
        **_statistics(log),
        "retained_fraction": log.retained_fraction,
        "eq3": None,
        "filtered": None,
    }
    if eq3 and log.protocol == THREE_SETTING:
        s = eq3_scan(log)
        report["eq3"] = {"triples": s.triples, "max": s.max,
                         "histogram": {str(k): v for k, v in s.histogram.items()}}
    if window is not None:
        filtered = coincidence_filter(log, window)
        report["filtered"] = {
            "window": window if math.isfinite(window) else None,
            "retained_fraction": filtered.retained_fraction,
            **_statistics(filtered),
        }
    return report
