"""Frame-processing controller: threshold, compare, count, alert.

Each captured frame is converted to grayscale, binarized against the gray
threshold T, and compared with the previous binarized frame. When the
two frames are similar enough (>= S percent of pixels unchanged) only
newly appeared objects are counted (Algorithm B), which keeps insects
that died inside the trap from being recounted every frame; otherwise
the whole frame is recounted (Algorithm A). The very first frame has no
predecessor and always runs Algorithm A.

State is owned by a single processing loop; ``process_frame`` is pure in
(state, frame, config, timestamp) and returns the updated state, so
identical inputs always produce identical events. Timestamps are always
injected, never read from a clock here.

Event log format (one JSON object per line, the golden-log fixture
format): keys exactly ``seq, ts, count, algorithm, similarity, image_ref,
config`` with ``config`` holding ``{t, s, lower, upper}``; a missing
similarity (first frame) serializes as null.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from collections import deque
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from . import imaging
from .errors import ConfigError, ImageFormatError

logger = logging.getLogger(__name__)

__all__ = [
    "Algorithm",
    "DetectionConfig",
    "DetectorState",
    "DetectionEvent",
    "DetectionWarning",
    "select_algorithm",
    "algorithm_a",
    "algorithm_b",
    "new_object_mask",
    "process_frame",
    "run_detection",
    "DetectionRun",
    "EventBus",
    "format_event_line",
    "parse_event_line",
    "format_ts",
    "parse_ts",
]


class Algorithm(str, Enum):
    """Which counting strategy produced an event's count."""

    A = "A"
    B = "B"
    A_FIRST_FRAME = "A-first-frame"


def format_ts(dt: datetime) -> str:
    """ISO-8601 UTC timestamp used in all logs and APIs."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat()


def parse_ts(text: str) -> datetime:
    """Inverse of format_ts; also accepts a trailing 'Z'."""
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class DetectionConfig:
    """The live-tunable detection parameters.

    Defaults are the values the trap ships with: gray threshold 60,
    similarity threshold 97%, weevil area 27785..266000 px, alert on any
    detection.
    """

    t: int = 60
    s: float = 97.0
    lower: int = 27785
    upper: int = 266000
    alert_threshold: int = 1

    def __post_init__(self):
        problems = self.validate_fields(self.to_dict())
        if problems:
            raise ConfigError("; ".join(f"{k}: {v}" for k, v in problems.items()))

    @staticmethod
    def validate_fields(values: dict) -> dict[str, str]:
        """Field-level diagnostics for a candidate config, empty if valid."""
        problems: dict[str, str] = {}

        def _num(name, kind):
            v = values.get(name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                problems[name] = "must be a number"
                return None
            if kind is int and int(v) != v:
                problems[name] = "must be an integer"
                return None
            return kind(v)

        t = _num("t", int)
        s = _num("s", float)
        lower = _num("lower", int)
        upper = _num("upper", int)
        alert = _num("alert_threshold", int)
        if t is not None and not 0 <= t <= 255:
            problems["t"] = "must be in [0, 255]"
        if s is not None and not 0.0 <= s <= 100.0:
            problems["s"] = "must be in [0, 100]"
        if lower is not None and lower < 1:
            problems["lower"] = "must be >= 1"
        if upper is not None and lower is not None and 1 <= lower and upper < lower:
            problems["upper"] = "must be >= lower"
        if alert is not None and alert < 1:
            problems["alert_threshold"] = "must be >= 1"
        return problems

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "s": self.s,
            "lower": self.lower,
            "upper": self.upper,
            "alert_threshold": self.alert_threshold,
        }

    @classmethod
    def from_dict(cls, values: dict) -> "DetectionConfig":
        known = {k: values[k] for k in cls.__dataclass_fields__ if k in values}
        unknown = set(values) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**known)
        return replace(
            cfg,
            t=int(cfg.t),
            s=float(cfg.s),
            lower=int(cfg.lower),
            upper=int(cfg.upper),
            alert_threshold=int(cfg.alert_threshold),
        )

    @classmethod
    def from_file(cls, path) -> "DetectionConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class DetectorState:
    """Processing-loop state: the previous binarized frame (absent until
    the first frame was processed) and the frame counter."""

    previous: Optional[np.ndarray] = None
    frame_seq: int = 0

    @classmethod
    def initial(cls) -> "DetectorState":
        return cls()


@dataclass(frozen=True)
class DetectionEvent:
    """One processed frame: what was counted, how, and with what config."""

    seq: int
    timestamp: datetime
    count: int
    algorithm: Algorithm
    similarity: Optional[float]
    image_ref: str
    config_snapshot: DetectionConfig

    def to_log_obj(self) -> dict:
        cfg = self.config_snapshot
        return {
            "seq": self.seq,
            "ts": format_ts(self.timestamp),
            "count": self.count,
            "algorithm": self.algorithm.value,
            "similarity": self.similarity,
            "image_ref": self.image_ref,
            "config": {"t": cfg.t, "s": cfg.s, "lower": cfg.lower, "upper": cfg.upper},
        }


@dataclass(frozen=True)
class DetectionWarning:
    """Raised alongside an event whose count reached the alert threshold."""

    event_seq: int
    timestamp: datetime
    count: int
    message: str

    def to_obj(self) -> dict:
        return {
            "event_seq": self.event_seq,
            "ts": format_ts(self.timestamp),
            "count": self.count,
            "message": self.message,
        }


def format_event_line(event: DetectionEvent) -> str:
    return json.dumps(event.to_log_obj(), separators=(",", ":"))


def parse_event_line(line: str) -> DetectionEvent:
    return event_from_log_obj(json.loads(line))


def event_from_log_obj(obj: dict) -> DetectionEvent:
    """Rebuild an event from its log object.

    The log's config object carries only (t, s, lower, upper); the alert
    threshold is not part of the wire format and defaults to 1 on parse.
    """
    cfg = obj["config"]
    return DetectionEvent(
        seq=int(obj["seq"]),
        timestamp=parse_ts(obj["ts"]),
        count=int(obj["count"]),
        algorithm=Algorithm(obj["algorithm"]),
        similarity=None if obj["similarity"] is None else float(obj["similarity"]),
        image_ref=str(obj["image_ref"]),
        config_snapshot=DetectionConfig(
            t=int(cfg["t"]),
            s=float(cfg["s"]),
            lower=int(cfg["lower"]),
            upper=int(cfg["upper"]),
        ),
    )


def select_algorithm(similarity: float, s: float) -> Algorithm:
    """A below the similarity threshold, B at or above it.

    Equality routes to B: B is the conservative branch that cannot
    double-count persistent objects.
    """
    if not 0.0 <= similarity <= 100.0:
        raise ConfigError(f"similarity must be in [0, 100], got {similarity}")
    if not 0.0 <= s <= 100.0:
        raise ConfigError(f"similarity threshold must be in [0, 100], got {s}")
    return Algorithm.B if similarity >= s else Algorithm.A


def algorithm_a(current: np.ndarray, cfg: DetectionConfig) -> int:
    """Count every in-range component in the current frame."""
    return imaging.count_weevils(
        imaging.label_components(current), cfg.lower, cfg.upper
    )


def new_object_mask(previous: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Binary mask of pixels that are foreground now but were background
    before. Departed objects leave difference pixels but no current
    foreground, so they contribute nothing."""
    prev = imaging._require_binary(previous, "previous frame")
    cur = imaging._require_binary(current, "current frame")
    imaging._require_same_shape(prev, cur)
    return np.where((cur == 255) & (prev == 0), 255, 0).astype(np.uint8)


def algorithm_b(previous: np.ndarray, current: np.ndarray, cfg: DetectionConfig) -> int:
    """Count only in-range components that newly appeared since the
    previous frame."""
    mask = new_object_mask(previous, current)
    return imaging.count_weevils(imaging.label_components(mask), cfg.lower, cfg.upper)


def _default_sink(pgm_bytes: bytes, captured_at: datetime) -> str:
    # Same content addressing the store uses, so logs are identical with
    # and without persistence.
    return hashlib.sha256(pgm_bytes).hexdigest()


def process_frame(
    state: DetectorState,
    frame: np.ndarray,
    cfg: DetectionConfig,
    now: datetime,
    sink: Callable[[bytes, datetime], str] | None = None,
) -> tuple[DetectorState, DetectionEvent, Optional[DetectionWarning]]:
    """Run the full per-frame flow on one captured frame.

    ``sink`` receives the grayscale capture encoded as PGM and returns the
    image reference recorded in the event; without a sink the reference is
    the content hash the store would assign.
    """
    gray = imaging.to_grayscale(frame)
    binary = imaging.binary_threshold(gray, cfg.t)

    if state.previous is None:
        similarity: Optional[float] = None
        algorithm = Algorithm.A_FIRST_FRAME
        count = algorithm_a(binary, cfg)
    else:
        similarity = imaging.similarity_percent(state.previous, binary)
        algorithm = select_algorithm(similarity, cfg.s)
        if algorithm is Algorithm.A:
            count = algorithm_a(binary, cfg)
        else:
            count = algorithm_b(state.previous, binary, cfg)

    image_ref = (sink or _default_sink)(imaging.encode_pgm(gray), now)
    seq = state.frame_seq + 1
    event = DetectionEvent(
        seq=seq,
        timestamp=now,
        count=count,
        algorithm=algorithm,
        similarity=similarity,
        image_ref=image_ref,
        config_snapshot=cfg,
    )
    warning = None
    if count >= cfg.alert_threshold:
        warning = DetectionWarning(
            event_seq=seq,
            timestamp=now,
            count=count,
            message=f"{count} weevil(s) detected in frame {seq}",
        )
    return DetectorState(previous=binary, frame_seq=seq), event, warning


@dataclass
class DetectionRun:
    """Outcome of a batch run over a frame sequence."""

    events: list[DetectionEvent] = field(default_factory=list)
    warnings: list[DetectionWarning] = field(default_factory=list)
    rejected: int = 0
    state: DetectorState = field(default_factory=DetectorState.initial)

    @property
    def total_count(self) -> int:
        return sum(e.count for e in self.events)


def run_detection(
    frames: Iterable,
    cfg: DetectionConfig,
    *,
    start_ts: datetime,
    interval_s: float = 1.0,
    sink: Callable[[bytes, datetime], str] | None = None,
    state: DetectorState | None = None,
) -> DetectionRun:
    """Process a sequence of frames (arrays, encoded bytes, or paths).

    Timestamps are injected: frame k gets ``start_ts + k * interval_s``
    counting processed frames only. A frame that fails to decode is
    rejected and logged; state is unchanged and the sequence numbering
    stays contiguous.
    """
    run = DetectionRun(state=state or DetectorState.initial())
    for item in frames:
        try:
            if isinstance(item, (str, Path)):
                frame = imaging.read_image(item)
            elif isinstance(item, (bytes, bytearray)):
                frame = imaging.decode_image(bytes(item))
            else:
                frame = np.asarray(item)
        except ImageFormatError as exc:
            logger.error("frame rejected: %s", exc)
            run.rejected += 1
            continue
        now = start_ts + run.state.frame_seq * timedelta(seconds=interval_s)
        run.state, event, warning = process_frame(run.state, frame, cfg, now, sink)
        run.events.append(event)
        if warning is not None:
            run.warnings.append(warning)
    return run


class Subscription:
    """Bounded consumer-side buffer of an EventBus.

    When the buffer is full the oldest item is dropped and ``dropped``
    increments; the publisher never blocks.
    """

    def __init__(self, maxlen: int):
        self._items: deque = deque(maxlen=maxlen)
        self._lock = threading.Lock()
        self.dropped = 0

    def _offer(self, item) -> None:
        with self._lock:
            if len(self._items) == self._items.maxlen:
                self.dropped += 1
            self._items.append(item)

    def poll(self) -> list:
        with self._lock:
            items = list(self._items)
            self._items.clear()
        return items


class EventBus:
    """One-way fan-out channel from the detection loop to consumers."""

    def __init__(self):
        self._subs: list[Subscription] = []
        self._lock = threading.Lock()

    def subscribe(self, maxlen: int = 256) -> Subscription:
        sub = Subscription(maxlen)
        with self._lock:
            self._subs.append(sub)
        return sub

    def publish(self, item) -> None:
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            sub._offer(item)
