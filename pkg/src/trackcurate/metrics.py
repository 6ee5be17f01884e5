"""Tracking metrics: per-frame IoU matrices, mIoU, success AUC, NStd, challenge curves."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from trackcurate import _kernels
from trackcurate.errors import DataError
from trackcurate.geometry import Trajectory


@dataclass(frozen=True, eq=False)
class IoUMatrix:
    """N trackers x M' evaluable frames of overlap scores for one sequence."""

    values: np.ndarray
    tracker_ids: tuple[str, ...]
    sequence_id: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DataError(f"IoU matrix for {self.sequence_id!r} must be non-empty 2-D, got shape {v.shape}")
        if len(self.tracker_ids) != v.shape[0]:
            raise DataError("tracker_ids must match the number of rows")
        if not ((v >= 0.0) & (v <= 1.0)).all():
            raise DataError(f"IoU matrix for {self.sequence_id!r} has entries outside [0, 1]")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "tracker_ids", tuple(self.tracker_ids))

    @property
    def n_trackers(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]

    def row(self, tracker: str) -> np.ndarray:
        return self.values[self.tracker_ids.index(tracker)]


def iou_matrix(seq, results: Mapping[str, Trajectory], include_first_frame: bool = True) -> IoUMatrix:
    """Overlap scores of each tracker against ``seq.gt``.

    Rows follow sorted tracker names. Frames where the ground truth is absent
    are dropped for every tracker; with ``include_first_frame=False`` the
    initialisation frame is dropped as well.
    """
    gt = seq.gt.boxes
    names = sorted(results)
    if not names:
        raise DataError(f"sequence {seq.id!r}: no tracker results")
    for name in names:
        if len(results[name]) != len(gt):
            raise DataError(
                f"sequence {seq.id!r}: tracker {name!r} has {len(results[name])} frames, expected {len(gt)}"
            )
    keep = ~np.isnan(gt[:, 0])
    if not include_first_frame:
        keep[0] = False
    if not keep.any():
        raise DataError(f"sequence {seq.id!r}: sequence has no evaluable frames")
    pred = np.stack([results[n].boxes[keep] for n in names])
    values = _kernels.iou_rows(np.ascontiguousarray(gt[keep]), np.ascontiguousarray(pred))
    np.minimum(values, 1.0, out=values)
    return IoUMatrix(values, tuple(names), seq.id)


def miou(S: IoUMatrix, tracker: int) -> float:
    return float(np.mean(S.values[tracker]))


def dataset_mean_miou(scores: Sequence[float]) -> float:
    """Mean of per-tracker mIoU values (the "mean mIoU" statistic of a dataset)."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise DataError("dataset_mean_miou needs at least one score")
    return float(arr.mean())


def nstd_miou(scores: Sequence[float]) -> float:
    """Population std of per-tracker mIoU divided by their mean, as a percentage."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size < 2:
        raise DataError("nstd_miou needs at least two scores")
    mean = arr.mean()
    if mean == 0:
        raise DataError("undefined normalized std: mean mIoU is zero")
    return float(100.0 * arr.std() / mean)


def _exceed_fractions(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    # fraction of values strictly greater than each threshold
    ordered = np.sort(values)
    return (ordered.size - np.searchsorted(ordered, thresholds, side="right")) / ordered.size


def _grid(step: float) -> np.ndarray:
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise DataError(f"threshold step {step} must divide 1 evenly")
    return np.arange(n + 1) / n


def success_curve(row, step: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    row = np.asarray(row, dtype=np.float64)
    if row.size == 0:
        raise DataError("success curve needs at least one frame")
    thresholds = _grid(step)
    return thresholds, _exceed_fractions(row, thresholds)


def success_auc(row, step: float = 0.05) -> float:
    """Average over thresholds 0, step, ..., 1 of the fraction of frames with IoU > threshold."""
    _, fractions = success_curve(row, step)
    return float(fractions.mean())


@dataclass(frozen=True, eq=False)
class ChallengeCurve:
    thresholds: np.ndarray
    fractions: np.ndarray
    auc: float
    label: str = ""


def challenge_curve(errors, step: float = 0.01, label: str = "") -> ChallengeCurve:
    """Fraction of sequences whose mean mIoU error exceeds each threshold in [0, 1].

    The AUC is the trapezoid integral of that fraction over the thresholds.
    """
    errs = np.asarray(errors, dtype=np.float64)
    if errs.size == 0:
        raise DataError("challenge curve needs at least one sequence")
    if ((errs < 0) | (errs > 1)).any():
        raise DataError("mIoU errors must lie in [0, 1]")
    thresholds = _grid(step)
    fractions = _exceed_fractions(errs, thresholds)
    auc = float(np.trapezoid(fractions, thresholds))
    return ChallengeCurve(thresholds, fractions, auc, label)


def three_pass_aggregate(values: Sequence[float], max_passes: int | None = None) -> float:
    """Mean of a tracker's per-pass scores."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise DataError("need at least one pass")
    if max_passes is not None and arr.size > max_passes:
        raise DataError(f"got {arr.size} passes, at most {max_passes} configured")
    return float(arr.mean())


def sequence_scores(corpus, metric: str = "miou", include_first_frame: bool = True) -> dict[str, dict[str, float]]:
    """Per-sequence, per-tracker score averaged over all passes.

    Returns ``{sequence_id: {tracker: score}}`` in canonical order.
    """
    if metric not in ("miou", "success_auc"):
        raise DataError(f"unknown ranking metric {metric!r}")
    passes = corpus.passes
    if not passes:
        raise DataError("corpus has no tracker results")
    out = {}
    for seq in corpus.sequences:
        per_tracker: dict[str, list[float]] = {}
        for k in passes:
            preds = corpus.predictions(seq.id, k)
            if not preds:
                continue
            S = iou_matrix(seq, preds, include_first_frame)
            for i, name in enumerate(S.tracker_ids):
                v = miou(S, i) if metric == "miou" else success_auc(S.values[i])
                per_tracker.setdefault(name, []).append(v)
        out[seq.id] = {name: three_pass_aggregate(vals) for name, vals in sorted(per_tracker.items())}
    return out


def tracker_scores(per_sequence: Mapping[str, Mapping[str, float]], ids=None) -> dict[str, float]:
    """Average per-sequence scores over ``ids`` (default: all) for every tracker."""
    ids = sorted(per_sequence) if ids is None else sorted(ids)
    if not ids:
        raise DataError("cannot score trackers on an empty sequence set")
    trackers = sorted(per_sequence[ids[0]])
    out = {}
    for t in trackers:
        vals = []
        for sid in ids:
            if t not in per_sequence[sid]:
                raise DataError(f"tracker {t!r} has no result on sequence {sid!r}")
            vals.append(per_sequence[sid][t])
        out[t] = float(np.mean(vals))
    return out


def rank_trackers(scores: Mapping[str, float]) -> list[str]:
    """Tracker names by descending score; exact ties go to the lexicographically smaller name."""
    return sorted(scores, key=lambda t: (-scores[t], t))
