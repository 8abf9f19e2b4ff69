import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make reference.py importable

from trapsight.detector import DetectionConfig
from trapsight.simulator import ScenarioObject, TrapScenario


@pytest.fixture
def golden_scenario() -> TrapScenario:
    """The algorithm-switching script: a persistent blob, one arrival,
    then a frame where exactly 60% of all pixels change (a 480x384 rect in
    a 640x480 frame), driving similarity to exactly 40%."""
    return TrapScenario(
        width=640,
        height=480,
        frame_count=4,
        objects=(
            ScenarioObject(x=40, y=80, pixel_area=2000, dead=True, name="blob1"),
            ScenarioObject(
                x=600, y=360, pixel_area=2000, appear_frame=2, name="blob2"
            ),
            ScenarioObject(
                x=320,
                y=240,
                pixel_area=184_320,
                appear_frame=3,
                shape="rect",
                aspect=1.25,
                name="blanket",
            ),
        ),
    )


@pytest.fixture
def golden_config() -> DetectionConfig:
    # Area range scaled to the small synthetic blobs, not the full-res
    # field-of-view bounds.
    return DetectionConfig(t=60, s=97.0, lower=500, upper=5000, alert_threshold=1)


@pytest.fixture
def fixed_clock():
    """Deterministic clock: starts 2024-06-01T00:00:00Z, +1 s per call."""
    state = {"tick": -1}

    def clock() -> datetime:
        state["tick"] += 1
        return datetime(2024, 6, 1, tzinfo=timezone.utc) + timedelta(
            seconds=state["tick"]
        )

    return clock
