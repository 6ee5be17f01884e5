"""Hot numeric kernels.

Each kernel has a pure-numpy implementation and a numba one. The numba path is
used when numba imports cleanly and ``TRACKCURATE_DISABLE_NUMBA`` is unset (or
set to ``0``). Both paths perform the same floating point operations per
element, so IoU values agree bit for bit; reductions may differ in the last ulp
because numpy uses pairwise summation.
"""
import os

import numpy as np

_DISABLED = os.environ.get("TRACKCURATE_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by TRACKCURATE_DISABLE_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"


def iou_rows_numpy(gt, pred):
    """IoU of every prediction row against the ground truth.

    gt: (M, 4) xywh, all rows finite.
    pred: (K, M, 4) xywh; a row containing NaN is an absent prediction.
    Returns a (K, M) float64 array; absent predictions score 0.
    """
    gx1 = gt[:, 0]
    gy1 = gt[:, 1]
    gx2 = gx1 + gt[:, 2]
    gy2 = gy1 + gt[:, 3]
    px1 = pred[..., 0]
    py1 = pred[..., 1]
    px2 = px1 + pred[..., 2]
    py2 = py1 + pred[..., 3]
    iw = np.minimum(gx2, px2) - np.maximum(gx1, px1)
    ih = np.minimum(gy2, py2) - np.maximum(gy1, py1)
    inter = np.where(iw > 0.0, iw, 0.0) * np.where(ih > 0.0, ih, 0.0)
    union = (gx2 - gx1) * (gy2 - gy1) + (px2 - px1) * (py2 - py1) - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(union > 0.0, inter / union, 0.0)
    out[np.isnan(pred).any(axis=-1)] = 0.0
    return out


def abs_step_rows_numpy(scores):
    """Per-row sum of |S[i, j+1] - S[i, j]| over adjacent columns."""
    if scores.shape[1] < 2:
        return np.zeros(scores.shape[0])
    return np.abs(np.diff(scores, axis=1)).sum(axis=1)


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def iou_rows_numba(gt, pred):
        k, m = pred.shape[0], pred.shape[1]
        out = np.zeros((k, m))
        for j in range(m):
            gx1 = gt[j, 0]
            gy1 = gt[j, 1]
            gx2 = gx1 + gt[j, 2]
            gy2 = gy1 + gt[j, 3]
            garea = (gx2 - gx1) * (gy2 - gy1)
            for i in range(k):
                px1 = pred[i, j, 0]
                py1 = pred[i, j, 1]
                pw = pred[i, j, 2]
                ph = pred[i, j, 3]
                if np.isnan(px1) or np.isnan(py1) or np.isnan(pw) or np.isnan(ph):
                    continue
                px2 = px1 + pw
                py2 = py1 + ph
                iw = min(gx2, px2) - max(gx1, px1)
                ih = min(gy2, py2) - max(gy1, py1)
                if iw <= 0.0 or ih <= 0.0:
                    inter = 0.0
                else:
                    inter = iw * ih
                union = garea + (px2 - px1) * (py2 - py1) - inter
                if union > 0.0:
                    out[i, j] = inter / union
        return out

    @njit(cache=True, nogil=True)
    def abs_step_rows_numba(scores):
        out = np.zeros(scores.shape[0])
        for i in range(scores.shape[0]):
            total = 0.0
            for j in range(scores.shape[1] - 1):
                total += abs(scores[i, j + 1] - scores[i, j])
            out[i] = total
        return out

    iou_rows = iou_rows_numba
    abs_step_rows = abs_step_rows_numba
else:
    iou_rows = iou_rows_numpy
    abs_step_rows = abs_step_rows_numpy
