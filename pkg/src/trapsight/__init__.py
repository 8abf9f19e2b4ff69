"""Image-based pea-weevil trap: detection pipeline, virtual-trap
simulation, calibration utilities, persistence, and an HTTP API.

The heavy per-pixel work sits behind :mod:`trapsight.kernels`, which
picks the compiled extension when available and an equivalent pure-NumPy
implementation otherwise (``TRAPSIGHT_PURE_PYTHON=1`` forces the
fallback).
"""

from .detector import (
    Algorithm,
    DetectionConfig,
    DetectionEvent,
    DetectionWarning,
    DetectorState,
    process_frame,
    run_detection,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    ImageFormatError,
    StorageError,
    TrapSightError,
)
from .imaging import Component, binary_threshold, label_components, to_grayscale
from .store import Store

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Algorithm",
    "Component",
    "ConfigError",
    "DetectionConfig",
    "DetectionEvent",
    "DetectionWarning",
    "DetectorState",
    "DimensionMismatchError",
    "ImageFormatError",
    "StorageError",
    "Store",
    "TrapSightError",
    "binary_threshold",
    "label_components",
    "process_frame",
    "run_detection",
    "to_grayscale",
]
