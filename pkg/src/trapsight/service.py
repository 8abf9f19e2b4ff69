"""HTTP operations shell around the detector, store, and simulator.

The service owns three pieces of mutable state and nothing else:

* the current :class:`ConfigSnapshot` — swapped atomically on accepted
  updates, read exactly once per processed frame;
* the detector state (previous binarized frame + frame counter);
* a persisted warning feed with dense sequence numbers, so polling
  clients can resume from a cursor with no gaps and no duplicates.

Frames come from a pluggable :class:`FrameSource`; in this artifact that
is a scripted scenario or a directory of images (no camera hardware).
``POST /api/capture`` pulls one frame through the full pipeline; every
GET is a pure view. Validation failures answer with
``{"errors": {field: message}}`` and status 400 so form UIs can annotate
fields directly.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Protocol

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import imaging, kernels
from .detector import (
    DetectionConfig,
    DetectionWarning,
    DetectorState,
    format_ts,
    parse_ts,
    process_frame,
)
from .errors import StorageError, TrapSightError
from .simulator import TrapScenario, render_frame
from .store import Store

__all__ = [
    "ConfigSnapshot",
    "WarningLog",
    "FrameSource",
    "ScenarioFrameSource",
    "DirectoryFrameSource",
    "ServiceRuntime",
    "create_app",
]


@dataclass(frozen=True)
class ConfigSnapshot:
    """One immutable generation of the live configuration."""

    config: DetectionConfig
    version: int
    applied_at: datetime

    def to_obj(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "version": self.version,
            "applied_at": format_ts(self.applied_at),
        }


class WarningLog:
    """Append-only warning feed with dense sequence numbers.

    Persisted as JSON Lines next to the store so cursors survive service
    restarts; `since(cursor)` returns everything after the cursor plus the
    new head, which is all a poll loop needs.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._entries: list[dict] = []
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line:
                    self._entries.append(json.loads(line))

    @property
    def head(self) -> int:
        return self._entries[-1]["seq"] if self._entries else 0

    def append(self, warning: DetectionWarning) -> dict:
        entry = {"seq": self.head + 1, **warning.to_obj()}
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
        self._entries.append(entry)
        return entry

    def since(self, cursor: int) -> tuple[list[dict], int]:
        batch = [e for e in self._entries if e["seq"] > cursor]
        return batch, self.head


class FrameSource(Protocol):
    def next_frame(self) -> Optional[np.ndarray]:
        """Next frame to process, or None when the source is exhausted."""


class ScenarioFrameSource:
    """Serves a scripted scenario's frames in order, then reports
    exhaustion."""

    def __init__(self, scenario: TrapScenario):
        self.scenario = scenario
        self._next = 0

    def next_frame(self) -> Optional[np.ndarray]:
        if self._next >= self.scenario.frame_count:
            return None
        frame = render_frame(self.scenario, self._next)
        self._next += 1
        return frame


class DirectoryFrameSource:
    """Serves the images of a directory in name order."""

    def __init__(self, directory):
        self.paths = sorted(
            p
            for p in Path(directory).iterdir()
            if p.suffix.lower() in (".pgm", ".png")
        )
        self._next = 0

    def next_frame(self) -> Optional[np.ndarray]:
        if self._next >= len(self.paths):
            return None
        frame = imaging.read_image(self.paths[self._next])
        self._next += 1
        return frame


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class ServiceRuntime:
    """Shared state behind the HTTP API.

    ``clock`` is injectable so tests can pin timestamps; captures are
    serialized by a lock (one writer), while readers only ever see a
    published snapshot or the store's consistent prefix.
    """

    def __init__(
        self,
        store: Store,
        frame_source: FrameSource,
        config: Optional[DetectionConfig] = None,
        clock: Callable[[], datetime] = _utc_now,
    ):
        self.store = store
        self.frame_source = frame_source
        self.clock = clock
        self.started_at = clock()
        self.snapshot = ConfigSnapshot(
            config=config or DetectionConfig(),
            version=1,
            applied_at=self.started_at,
        )
        self.state = DetectorState.initial()
        self.warning_log = WarningLog(store.root / "warnings.jsonl")
        self._capture_lock = threading.Lock()
        self._config_lock = threading.Lock()

    @property
    def frames_processed(self) -> int:
        return self.state.frame_seq

    def apply_config(self, body: dict) -> tuple[Optional[ConfigSnapshot], dict]:
        """Merge a (possibly partial) update over the current config.

        Returns (snapshot, {}) on success or (None, field errors) with the
        running config untouched. Every accepted update bumps the version,
        including no-op resubmits — the echo tells the UI what the
        detector runs, not whether anything differed.
        """
        if not isinstance(body, dict):
            return None, {"body": "expected a JSON object"}
        unknown = set(body) - set(DetectionConfig.__dataclass_fields__)
        if unknown:
            return None, {k: "unknown field" for k in sorted(unknown)}
        with self._config_lock:
            merged = {**self.snapshot.config.to_dict(), **body}
            errors = DetectionConfig.validate_fields(merged)
            if errors:
                return None, errors
            snapshot = ConfigSnapshot(
                config=DetectionConfig.from_dict(merged),
                version=self.snapshot.version + 1,
                applied_at=self.clock(),
            )
            self.snapshot = snapshot
            return snapshot, {}

    def capture(self) -> Optional[dict]:
        """Pull one frame through the pipeline; None when exhausted."""
        with self._capture_lock:
            frame = self.frame_source.next_frame()
            if frame is None:
                return None
            snapshot = self.snapshot  # exactly one snapshot per frame
            now = self.clock()

            def sink(pgm_bytes: bytes, ts: datetime) -> str:
                return self.store.put_image(pgm_bytes, captured_at=ts).content_id

            state, event, warning = process_frame(
                self.state, frame, snapshot.config, now, sink
            )
            record = self.store.append_event(event)
            if warning is not None:
                self.warning_log.append(warning)
            self.state = state
            return record.to_obj()


def _bad_request(errors: dict) -> JSONResponse:
    return JSONResponse(status_code=400, content={"errors": errors})


def create_app(runtime: ServiceRuntime) -> FastAPI:
    app = FastAPI(title="trapsight", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.runtime = runtime

    @app.get("/api/status")
    def get_status():
        rt: ServiceRuntime = app.state.runtime
        last = rt.store.latest_event()
        return {
            "uptime_s": (rt.clock() - rt.started_at).total_seconds(),
            "frames_processed": rt.frames_processed,
            "config_version": rt.snapshot.version,
            "event_count": rt.store.event_count,
            "image_count": rt.store.image_count,
            "kernel_backend": kernels.BACKEND,
            "last_event": None if last is None else last.to_obj(),
        }

    @app.get("/api/config")
    def get_config():
        rt: ServiceRuntime = app.state.runtime
        return rt.snapshot.to_obj()

    @app.put("/api/config")
    async def put_config(request: Request):
        rt: ServiceRuntime = app.state.runtime
        try:
            body = await request.json()
        except ValueError:
            return _bad_request({"body": "request body is not valid JSON"})
        snapshot, errors = rt.apply_config(body)
        if snapshot is None:
            return _bad_request(errors)
        return snapshot.to_obj()

    @app.get("/api/events")
    def get_events(request: Request):
        rt: ServiceRuntime = app.state.runtime
        bounds = {}
        for name in ("from", "to"):
            raw = request.query_params.get(name)
            if raw is None:
                bounds[name] = None
                continue
            try:
                bounds[name] = parse_ts(raw)
            except ValueError:
                return _bad_request({name: f"not an ISO-8601 timestamp: {raw!r}"})
        try:
            records = rt.store.query_events(bounds["from"], bounds["to"])
        except StorageError as exc:
            return _bad_request({"range": str(exc)})
        return [r.to_obj() for r in records]

    @app.get("/api/calendar")
    def get_calendar(month: str):
        rt: ServiceRuntime = app.state.runtime
        try:
            year_s, month_s = month.split("-")
            year, mon = int(year_s), int(month_s)
            if not 1 <= mon <= 12:
                raise ValueError(month)
        except ValueError:
            return _bad_request({"month": f"expected YYYY-MM, got {month!r}"})
        counts = rt.store.calendar_counts(year, mon)
        return {str(day): total for day, total in sorted(counts.items())}

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str, format: Optional[str] = None):
        rt: ServiceRuntime = app.state.runtime
        try:
            ref = rt.store.image_ref(image_id)
        except StorageError:
            return JSONResponse(
                status_code=404, content={"errors": {"id": "unknown image"}}
            )
        data = rt.store.get_image(image_id)
        if format is None:
            return Response(content=data, media_type=ref.media_type)
        if format != "png":
            return _bad_request({"format": "only png transcoding is supported"})
        if ref.media_type != "image/png":
            # Browsers cannot render PGM; transcode for <img> tags.
            data = imaging.encode_png(imaging.decode_image(data))
        return Response(content=data, media_type="image/png")

    @app.get("/api/warnings")
    def get_warnings(cursor: int = 0):
        rt: ServiceRuntime = app.state.runtime
        if cursor < 0:
            return _bad_request({"cursor": "cursor must be >= 0"})
        batch, head = rt.warning_log.since(cursor)
        return {"warnings": batch, "cursor": head}

    @app.post("/api/capture")
    def post_capture():
        rt: ServiceRuntime = app.state.runtime
        try:
            record = rt.capture()
        except TrapSightError as exc:
            return _bad_request({"capture": str(exc)})
        if record is None:
            return JSONResponse(
                status_code=409,
                content={"errors": {"capture": "frame source exhausted"}},
            )
        return {"event": record}

    return app
