"""Threshold calibration tooling.

Two jobs: per-class grayscale statistics over a labeled corpus (the basis
for choosing the gray threshold T) and the closed-form similarity
threshold S from the largest expected object area and the frame
resolution. No field-trap corpus ships with the package, so a synthetic
corpus generator stands in; within it weevil pixels separate cleanly from
debris, which is the property the chosen T = 60 relies on.

The recommendation helpers are advisory only: results are reported, never
applied to a running detector.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import imaging
from .errors import ConfigError
from .imaging import write_image

logger = logging.getLogger(__name__)

__all__ = [
    "GrayscaleStats",
    "Recommendation",
    "grayscale_stats",
    "similarity_threshold",
    "recommend_thresholds",
    "synthetic_corpus",
    "write_corpus",
    "load_corpus",
    "format_stats_table",
]


@dataclass(frozen=True)
class GrayscaleStats:
    """Pooled gray-level statistics of one object class."""

    class_name: str
    sample_count: int
    mean: float
    min: int
    max: int

    def to_obj(self) -> dict:
        return {
            "class": self.class_name,
            "samples": self.sample_count,
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
        }


def grayscale_stats(corpus: Iterable[tuple]) -> list[GrayscaleStats]:
    """Per-class gray statistics over masked pixels.

    ``corpus`` yields ``(gray_image, mask, class_label)``; the mask selects
    the object's pixels (nonzero = selected). Samples whose mask selects
    nothing are rejected with a diagnostic and skipped. Classes are
    reported in first-appearance order.
    """
    order: list[str] = []
    counts: dict[str, int] = {}
    sums: dict[str, int] = {}
    pixel_counts: dict[str, int] = {}
    mins: dict[str, int] = {}
    maxs: dict[str, int] = {}

    n_seen = 0
    for idx, (img, mask, label) in enumerate(corpus):
        n_seen += 1
        img = imaging._require_gray(img, f"sample {idx}")
        mask = np.asarray(mask)
        if mask.shape != img.shape:
            raise ConfigError(
                f"sample {idx} ({label}): mask shape {mask.shape} does not "
                f"match image shape {img.shape}"
            )
        selected = img[mask != 0]
        if selected.size == 0:
            logger.warning("sample %d (%s) rejected: empty mask", idx, label)
            continue
        if label not in counts:
            order.append(label)
            counts[label] = 0
            sums[label] = 0
            pixel_counts[label] = 0
            mins[label] = 255
            maxs[label] = 0
        counts[label] += 1
        sums[label] += int(selected.sum(dtype=np.int64))
        pixel_counts[label] += int(selected.size)
        mins[label] = min(mins[label], int(selected.min()))
        maxs[label] = max(maxs[label], int(selected.max()))

    if n_seen == 0:
        raise ConfigError("empty corpus")
    return [
        GrayscaleStats(
            class_name=label,
            sample_count=counts[label],
            mean=sums[label] / pixel_counts[label],
            min=mins[label],
            max=maxs[label],
        )
        for label in order
    ]


def similarity_threshold(max_object_area: int, width: int, height: int) -> float:
    """Similarity threshold that still tolerates one object of the given
    maximum area appearing on an otherwise unchanged frame:
    ``(1 - area / (width * height)) * 100``."""
    total = width * height
    if width < 1 or height < 1:
        raise ConfigError("frame dimensions must be positive")
    if not 0 < max_object_area < total:
        raise ConfigError(
            f"max object area must be in (0, {total}), got {max_object_area}"
        )
    return (1.0 - max_object_area / total) * 100.0


@dataclass(frozen=True)
class Recommendation:
    """Advisory gray-threshold recommendation; ``t`` is None when the
    class statistics leave no separating value."""

    t: Optional[int]
    reason: str

    @property
    def feasible(self) -> bool:
        return self.t is not None


def recommend_thresholds(
    stats: list[GrayscaleStats], margin: int = 15
) -> Recommendation:
    """Suggest a gray threshold: darkest-class max plus a sensitivity
    margin, required to stay below every non-weevil class mean."""
    weevil = next((s for s in stats if s.class_name == "weevil"), None)
    others = [s for s in stats if s.class_name != "weevil"]
    if weevil is None:
        raise ConfigError("stats contain no 'weevil' class")
    if not others:
        raise ConfigError("stats contain no non-weevil class to separate from")

    floor = min(s.mean for s in others)
    if weevil.max >= floor:
        return Recommendation(
            None,
            f"no separating value: weevil max {weevil.max} >= "
            f"lowest non-weevil mean {floor:.1f}",
        )
    t = weevil.max + margin
    if t >= floor:
        return Recommendation(
            None,
            f"margin {margin} pushes threshold to {t}, at or above the "
            f"lowest non-weevil mean {floor:.1f}",
        )
    return Recommendation(t, f"weevil max {weevil.max} + margin {margin}")


# ---------------------------------------------------------------------------
# Synthetic corpus


_CLASS_GRAY_RANGES = {
    # (low, high) inclusive gray ranges for object pixels
    "weevil": (18, 52),
    "leaf": (88, 150),
    "soil": (75, 135),
    "stone": (110, 200),
}


def synthetic_corpus(
    seed: int, samples_per_class: int = 10, size: tuple[int, int] = (96, 128)
) -> list[tuple[np.ndarray, np.ndarray, str]]:
    """Generate (image, mask, class) samples with the separation the field
    analysis found: weevil bodies dark, interfering objects well above the
    gray threshold."""
    h, w = size
    rng = np.random.default_rng(seed)
    corpus = []
    for class_name, (lo, hi) in _CLASS_GRAY_RANGES.items():
        for _ in range(samples_per_class):
            img = rng.integers(170, 236, size=(h, w), dtype=np.uint8)
            mask = np.zeros((h, w), dtype=np.uint8)
            cy = int(rng.integers(h // 4, 3 * h // 4))
            cx = int(rng.integers(w // 4, 3 * w // 4))
            ry = int(rng.integers(6, h // 4))
            rx = int(rng.integers(6, w // 4))
            yy, xx = np.ogrid[:h, :w]
            inside = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
            values = rng.integers(lo, hi + 1, size=int(inside.sum()), dtype=np.uint8)
            img[inside] = values
            mask[inside] = 255
            corpus.append((img, mask, class_name))
    return corpus


def write_corpus(corpus, directory, manifest_name: str = "manifest.jsonl") -> Path:
    """Write corpus samples as PGM pairs plus a JSON Lines manifest with
    (image_path, mask_path, class) per line; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = directory / manifest_name
    with manifest.open("w", encoding="utf-8") as fh:
        for idx, (img, mask, label) in enumerate(corpus):
            image_path = directory / f"{idx:04d}_{label}.pgm"
            mask_path = directory / f"{idx:04d}_{label}.mask.pgm"
            write_image(image_path, img)
            write_image(mask_path, mask)
            fh.write(
                json.dumps(
                    {
                        "image_path": image_path.name,
                        "mask_path": mask_path.name,
                        "class": label,
                    }
                )
                + "\n"
            )
    return manifest


def load_corpus(manifest_path) -> list[tuple[np.ndarray, np.ndarray, str]]:
    """Load a corpus manifest written by write_corpus (paths are resolved
    relative to the manifest)."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    corpus = []
    for line in manifest_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        entry = json.loads(line)
        img = imaging.read_image(base / entry["image_path"])
        mask = imaging.read_image(base / entry["mask_path"])
        corpus.append((img, mask, entry["class"]))
    return corpus


def format_stats_table(stats: list[GrayscaleStats]) -> str:
    """Aligned text table of per-class statistics."""
    headers = ("class", "samples", "mean", "min", "max")
    rows = [
        (s.class_name, str(s.sample_count), f"{s.mean:.1f}", str(s.min), str(s.max))
        for s in stats
    ]
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))))
    return "\n".join(lines)
