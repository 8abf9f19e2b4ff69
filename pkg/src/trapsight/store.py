"""Content-addressed capture store and append-only event journal.

Layout under a single data directory:

    blobs/<id[:2]>/<id>.<ext>   captured frames, named by SHA-256 of bytes
    events/YYYY-MM-DD.jsonl     one journal segment per UTC day

Journal lines are the detector's event objects prefixed with a
``storage_seq`` that is strictly monotonic across process restarts.
Writes are crash-safe in the simplest way that works: blobs land via
rename from a temp file, and on startup a torn final journal line (a
partial write from a crash) is moved to a ``.quarantine`` sidecar and the
segment truncated back to its last parseable line. Corruption anywhere
other than the tail is not self-healing and raises ``StorageError``.

All reads are served from an in-memory index built at startup; the disk
is the durability layer, not the query engine.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone, tzinfo
from pathlib import Path
from typing import Optional

from .detector import DetectionEvent, event_from_log_obj
from .errors import ImageFormatError, StorageError

__all__ = ["content_id", "sniff_image", "ImageBlobRef", "EventRecord", "Store"]

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def content_id(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sniff_image(data: bytes) -> tuple[str, str]:
    """(media type, file extension) for the supported capture formats."""
    if data.startswith(b"P5"):
        return "image/x-portable-graymap", ".pgm"
    if data.startswith(_PNG_MAGIC):
        return "image/png", ".png"
    raise ImageFormatError("unrecognized image payload (want PGM or PNG)")


@dataclass(frozen=True)
class ImageBlobRef:
    """Where a stored capture lives and what it is.

    ``captured_at`` rides on the blob's file mtime, so it survives
    restarts without a metadata sidecar.
    """

    content_id: str
    media_type: str
    size_bytes: int
    path: Path
    captured_at: datetime


@dataclass(frozen=True)
class EventRecord:
    """A journaled detection event plus its storage sequence number."""

    storage_seq: int
    event: DetectionEvent

    def to_obj(self) -> dict:
        return {"storage_seq": self.storage_seq, **self.event.to_log_obj()}

    @classmethod
    def from_obj(cls, obj: dict) -> "EventRecord":
        return cls(
            storage_seq=int(obj["storage_seq"]), event=event_from_log_obj(obj)
        )


def _utc_date(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%d")


class Store:
    """Single-directory persistence for captures and detection events."""

    def __init__(self, root, reporting_tz: tzinfo = timezone.utc):
        self.root = Path(root)
        self.reporting_tz = reporting_tz
        self.blob_dir = self.root / "blobs"
        self.event_dir = self.root / "events"
        self.blob_dir.mkdir(parents=True, exist_ok=True)
        self.event_dir.mkdir(parents=True, exist_ok=True)
        self._blobs: dict[str, ImageBlobRef] = {}
        self._records: list[EventRecord] = []
        self._scan_blobs()
        self._recover_journal()
        self._next_seq = (
            max((r.storage_seq for r in self._records), default=0) + 1
        )

    # -- images ------------------------------------------------------------

    def _scan_blobs(self) -> None:
        for path in sorted(self.blob_dir.glob("*/*")):
            cid = path.stem
            with open(path, "rb") as fh:
                media, _ = sniff_image(fh.read(8))
            stat = path.stat()
            self._blobs[cid] = ImageBlobRef(
                content_id=cid,
                media_type=media,
                size_bytes=stat.st_size,
                path=path,
                captured_at=datetime.fromtimestamp(stat.st_mtime, tz=timezone.utc),
            )

    def put_image(
        self, data: bytes, captured_at: Optional[datetime] = None
    ) -> ImageBlobRef:
        """Store a capture; storing the same bytes twice is a no-op that
        keeps the first capture instant."""
        media, ext = sniff_image(data)
        cid = content_id(data)
        existing = self._blobs.get(cid)
        if existing is not None:
            return existing
        if captured_at is None:
            captured_at = datetime.now(timezone.utc)
        target = self.blob_dir / cid[:2] / f"{cid}{ext}"
        target.parent.mkdir(exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            ts = captured_at.timestamp()
            os.utime(tmp, (ts, ts))
            os.replace(tmp, target)  # readers never see a partial blob
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        ref = ImageBlobRef(
            content_id=cid,
            media_type=media,
            size_bytes=len(data),
            path=target,
            captured_at=captured_at,
        )
        self._blobs[cid] = ref
        return ref

    def has_image(self, cid: str) -> bool:
        return cid in self._blobs

    def image_ref(self, cid: str) -> ImageBlobRef:
        try:
            return self._blobs[cid]
        except KeyError:
            raise StorageError(f"no stored image with id {cid}") from None

    def get_image(self, cid: str) -> bytes:
        return self.image_ref(cid).path.read_bytes()

    @property
    def image_count(self) -> int:
        return len(self._blobs)

    # -- events ------------------------------------------------------------

    def _recover_journal(self) -> None:
        for segment in sorted(self.event_dir.glob("*.jsonl")):
            raw = segment.read_bytes()
            pos = 0
            while pos < len(raw):
                nl = raw.find(b"\n", pos)
                line = raw[pos:] if nl == -1 else raw[pos:nl]
                if line:
                    try:
                        self._records.append(
                            EventRecord.from_obj(json.loads(line.decode("utf-8")))
                        )
                    except (ValueError, KeyError) as exc:
                        # An unparseable line with no terminating newline is
                        # a torn append: set it aside, keep the intact
                        # prefix. Anything else is real corruption.
                        if nl == -1:
                            with open(
                                segment.with_suffix(".jsonl.quarantine"), "ab"
                            ) as qf:
                                qf.write(line)
                            with open(segment, "r+b") as fh:
                                fh.truncate(pos)
                            break
                        raise StorageError(
                            f"corrupt journal line in {segment.name}: {exc}"
                        ) from exc
                pos = len(raw) if nl == -1 else nl + 1
        self._records.sort(key=lambda r: (r.event.timestamp, r.storage_seq))

    def append_event(self, event: DetectionEvent) -> EventRecord:
        """Journal one event. The referenced capture must already be stored
        (events must never point at images that do not exist)."""
        if not self.has_image(event.image_ref):
            raise StorageError(
                f"event references unknown image {event.image_ref}"
            )
        record = EventRecord(storage_seq=self._next_seq, event=event)
        segment = self.event_dir / f"{_utc_date(event.timestamp)}.jsonl"
        line = json.dumps(record.to_obj(), separators=(",", ":")) + "\n"
        with open(segment, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        self._next_seq += 1
        self._records.append(record)
        self._records.sort(key=lambda r: (r.event.timestamp, r.storage_seq))
        return record

    @property
    def event_count(self) -> int:
        return len(self._records)

    def latest_event(self) -> Optional[EventRecord]:
        return self._records[-1] if self._records else None

    def query_events(
        self,
        ts_from: Optional[datetime] = None,
        ts_to: Optional[datetime] = None,
    ) -> list[EventRecord]:
        """Events with ``ts_from <= ts < ts_to`` (half-open), time-ordered."""
        if ts_from is not None and ts_to is not None and ts_from > ts_to:
            raise StorageError(f"empty-or-inverted range: {ts_from} > {ts_to}")
        out = []
        for rec in self._records:
            ts = rec.event.timestamp
            if ts_from is not None and ts < ts_from:
                continue
            if ts_to is not None and ts >= ts_to:
                continue
            out.append(rec)
        return out

    def calendar_counts(self, year: int, month: int) -> dict[int, int]:
        """Summed detection counts per calendar day of the reporting
        timezone. Days without events are absent."""
        sums: dict[int, int] = {}
        for rec in self._records:
            local = rec.event.timestamp.astimezone(self.reporting_tz)
            if local.year == year and local.month == month:
                sums[local.day] = sums.get(local.day, 0) + rec.event.count
        return sums
