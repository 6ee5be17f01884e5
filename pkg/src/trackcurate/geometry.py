"""Axis-aligned boxes, trajectories and overlap scores."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from trackcurate.errors import DataError


@dataclass(frozen=True)
class BoundingBox:
    """Rectangle in continuous pixel coordinates, (x, y) is the top-left corner."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"box coordinates must be finite, got {vals}")
        if self.w < 0 or self.h < 0:
            raise DataError(f"box width/height must be non-negative, got w={self.w} h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when the union is empty."""
    ax2, ay2 = a.x + a.w, a.y + a.h
    bx2, by2 = b.x + b.w, b.y + b.h
    iw = min(ax2, bx2) - max(a.x, b.x)
    ih = min(ay2, by2) - max(a.y, b.y)
    inter = iw * ih if iw > 0 and ih > 0 else 0.0
    # areas from corners so that iou(a, a) is exactly 1
    union = (ax2 - a.x) * (ay2 - a.y) + (bx2 - b.x) * (by2 - b.y) - inter
    if union <= 0:
        return 0.0
    return inter / union


def frame_iou(gt: Optional[BoundingBox], pred: Optional[BoundingBox]) -> Optional[float]:
    """Score one aligned frame.

    ``None`` stands for an absent box. Returns ``None`` (skip) when the ground
    truth is absent, 0.0 when only the prediction is absent.
    """
    if gt is None:
        return None
    if pred is None:
        return 0.0
    return iou(gt, pred)


class Trajectory:
    """Per-frame boxes of one target, stored as an (M, 4) xywh array.

    Absent frames are rows of NaN. Present rows must be finite with
    non-negative width and height.
    """

    __slots__ = ("boxes",)

    def __init__(self, boxes):
        arr = np.array(boxes, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise DataError(f"trajectory must have shape (M, 4), got {arr.shape}")
        if arr.shape[0] < 1:
            raise DataError("trajectory must have at least one frame")
        nan_rows = np.isnan(arr)
        partial = nan_rows.any(axis=1) & ~nan_rows.all(axis=1)
        if partial.any():
            raise DataError(f"frame {int(np.argmax(partial)) + 1} is partially NaN")
        present = ~nan_rows.any(axis=1)
        body = arr[present]
        if not np.isfinite(body).all():
            raise DataError("present frames must have finite coordinates")
        if (body[:, 2:] < 0).any():
            raise DataError("present frames must have non-negative width and height")
        arr.setflags(write=False)
        self.boxes = arr

    @classmethod
    def from_frames(cls, frames: Sequence[Optional[BoundingBox]]) -> "Trajectory":
        rows = [f.as_tuple() if f is not None else (np.nan,) * 4 for f in frames]
        return cls(rows)

    def __len__(self) -> int:
        return self.boxes.shape[0]

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.boxes[:, 0])

    def __getitem__(self, j: int) -> Optional[BoundingBox]:
        row = self.boxes[j]
        if np.isnan(row[0]):
            return None
        return BoundingBox(*(float(v) for v in row))

    def __iter__(self) -> Iterator[Optional[BoundingBox]]:
        for j in range(len(self)):
            yield self[j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.boxes.shape == other.boxes.shape and bool(
            np.array_equal(self.boxes, other.boxes, equal_nan=True)
        )

    def __hash__(self):
        return hash(self.boxes.tobytes())

    def __repr__(self) -> str:
        return f"Trajectory(frames={len(self)}, present={int(self.present.sum())})"
