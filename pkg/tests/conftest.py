import math

import pytest

from eprblab.core import EventLog, LABEL_CODE, THREE_SETTING


def make_log(rows, protocol=THREE_SETTING, settings=None, **meta):
    """Build a log from (left label, left outcome, right label, right outcome[, dl, dr]) rows.

    Trial n is measured at tick n on both stations.
    """
    rows = list(rows)
    n = list(range(1, len(rows) + 1))
    delays = len(rows) > 0 and len(rows[0]) == 6
    if settings is None:
        settings = {"a": 0.0, "b": math.radians(120), "c": math.pi, "d": math.radians(135)}
    return EventLog(
        n=n,
        t_left=n,
        setting_left=[LABEL_CODE[r[0]] for r in rows],
        outcome_left=[r[1] for r in rows],
        t_right=n,
        setting_right=[LABEL_CODE[r[2]] for r in rows],
        outcome_right=[r[3] for r in rows],
        delay_left=[r[4] for r in rows] if delays else None,
        delay_right=[r[5] for r in rows] if delays else None,
        settings_table=settings,
        protocol=protocol,
        **meta,
    )


@pytest.fixture
def bell_angles():
    return {"a": 0.0, "b": math.radians(120), "c": math.radians(180)}


@pytest.fixture
def chsh_angles():
    return {"a": 0.0, "c": math.radians(90), "b": math.radians(45), "d": math.radians(135)}
