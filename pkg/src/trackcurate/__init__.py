"""Quality scoring, informative subset selection and evaluation for tracking benchmarks."""
from trackcurate._kernels import BACKEND
from trackcurate.errors import DataError, FormatError
from trackcurate.geometry import BoundingBox, Trajectory, frame_iou, iou

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundingBox",
    "DataError",
    "FormatError",
    "Trajectory",
    "frame_iou",
    "iou",
]
