"""CSV event logs with a JSON metadata sidecar.

``run.csv`` holds one row per trial::

    n,t_left,setting_left,outcome_left,delay_left,t_right,setting_right,outcome_right,delay_right

Outcomes are written ``-1``/``+1``; absent delays are empty fields.  The
sidecar ``run.json`` next to it carries model_id, seed, protocol
(``3-setting`` or ``4-setting``), the per-side settings table in radians
and the retained fraction of coincidence-filtered logs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import FOUR_SETTING, LABEL_CODE, LABELS, THREE_SETTING, EventLog

HEADER = (
    "n", "t_left", "setting_left", "outcome_left", "delay_left",
    "t_right", "setting_right", "outcome_right", "delay_right",
)
PROTOCOL_NAMES = {THREE_SETTING: "3-setting", FOUR_SETTING: "4-setting"}
PROTOCOL_FROM_NAME = {v: k for k, v in PROTOCOL_NAMES.items()}
_OUTCOME_TEXT = {1: "+1", -1: "-1"}
_OUTCOME_VALUE = {"+1": 1, "1": 1, "-1": -1}


class LogFormatError(ValueError):
    """Malformed log file; ``row`` is the 1-based line number in the CSV, if known."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def sidecar(log: EventLog) -> dict:
    return {
        "model_id": log.model_id,
        "seed": log.seed,
        "protocol": PROTOCOL_NAMES.get(log.protocol, log.protocol),
        "settings": log.settings_table,
        "retained_fraction": log.retained_fraction,
    }


def _delay_text(col):
    if col is None:
        return None
    return ["" if math.isnan(v) else repr(v) for v in col.tolist()]


def write_log(log: EventLog, path) -> tuple[Path, Path]:
    """Write ``path`` (CSV) and its sidecar; returns both paths."""
    path = Path(path)
    M = log.M
    blank = [""] * M
    dl = _delay_text(log.delay_left) or blank
    dr = _delay_text(log.delay_right) or blank
    ol = [_OUTCOME_TEXT.get(v, str(v)) for v in log.outcome_left.tolist()]
    orr = [_OUTCOME_TEXT.get(v, str(v)) for v in log.outcome_right.tolist()]
    sl = [LABELS[c] for c in log.setting_left.tolist()]
    sr = [LABELS[c] for c in log.setting_right.tolist()]
    lines = [",".join(HEADER)]
    lines.extend(
        f"{n},{tl},{a},{x},{da},{tr},{b},{y},{db}"
        for n, tl, a, x, da, tr, b, y, db in zip(
            log.n.tolist(), log.t_left.tolist(), sl, ol, dl, log.t_right.tolist(), sr, orr, dr
        )
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    side = sidecar_path(path)
    side.write_text(json.dumps(sidecar(log), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, side


def _parse_int(text: str, what: str, row: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise LogFormatError(f"{what} {text!r} is not an integer", row) from None


def _parse_delay(text: str, row: int) -> float:
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise LogFormatError(f"delay {text!r} is not a number", row) from None


def read_log(path, meta: dict | None = None) -> EventLog:
    """Parse a CSV log; metadata comes from ``meta`` or the sidecar file."""
    path = Path(path)
    if meta is None:
        side = sidecar_path(path)
        if not side.exists():
            raise LogFormatError(f"missing metadata sidecar {side}")
        try:
            meta = json.loads(side.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"sidecar {side} is not valid JSON: {exc}") from None
    cols: dict[str, list] = {name: [] for name in HEADER}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise LogFormatError(f"header must be {','.join(HEADER)}", 1)
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(HEADER):
                raise LogFormatError(f"expected {len(HEADER)} fields, got {len(row)}", row_no)
            rec = dict(zip(HEADER, (f.strip() for f in row)))
            cols["n"].append(_parse_int(rec["n"], "trial index", row_no))
            for side in ("left", "right"):
                cols[f"t_{side}"].append(_parse_int(rec[f"t_{side}"], "time tick", row_no))
                label = rec[f"setting_{side}"]
                if label not in LABEL_CODE:
                    raise LogFormatError(f"unknown setting label {label!r}", row_no)
                cols[f"setting_{side}"].append(LABEL_CODE[label])
                outcome = rec[f"outcome_{side}"]
                if outcome not in _OUTCOME_VALUE:
                    raise LogFormatError(f"outcome {outcome!r} is not -1 or +1", row_no)
                cols[f"outcome_{side}"].append(_OUTCOME_VALUE[outcome])
                cols[f"delay_{side}"].append(_parse_delay(rec[f"delay_{side}"], row_no))

    delays = {}
    for side in ("left", "right"):
        d = np.array(cols[f"delay_{side}"], dtype=np.float64)
        delays[side] = None if d.size == 0 or np.isnan(d).all() else d
    protocol = meta.get("protocol", "3-setting")
    return EventLog(
        n=cols["n"],
        t_left=cols["t_left"],
        setting_left=cols["setting_left"],
        outcome_left=cols["outcome_left"],
        t_right=cols["t_right"],
        setting_right=cols["setting_right"],
        outcome_right=cols["outcome_right"],
        delay_left=delays["left"],
        delay_right=delays["right"],
        settings_table=meta.get("settings", {}),
        protocol=PROTOCOL_FROM_NAME.get(protocol, protocol),
        model_id=str(meta.get("model_id", "")),
        seed=int(meta.get("seed", 0)),
        retained_fraction=float(meta.get("retained_fraction", 1.0)),
    )
