"""Sequence quality: challenge degree, discriminative ability, variation density.

The quality score of a sequence is the product ``Q = C * D * V``:

* ``C = 1 - mean(S)``, the mean IoU error over all trackers and frames;
* ``D = exp(eta * std_i(mean_j S[i, j]))``, population std across trackers;
* ``V = N(log sum |S[i, j+1] - S[i, j]|) / N(log M)`` where ``N`` min-max
  normalises a corpus-wide population into ``[norm_min, norm_max]``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from trackcurate import _kernels
from trackcurate.errors import DataError
from trackcurate.metrics import IoUMatrix, iou_matrix


@dataclass(frozen=True)
class QualityParams:
    eta: float = 5.0
    norm_min: float = 0.1
    norm_max: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self):
        if not self.eta > 0:
            raise DataError(f"eta must be positive, got {self.eta}")
        if not 0 < self.norm_min < self.norm_max:
            raise DataError(f"need 0 < norm_min < norm_max, got {self.norm_min}, {self.norm_max}")
        if not self.epsilon > 0:
            raise DataError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class QualityReport:
    sequence_id: str
    C: float
    D: float
    V_raw: float
    V: float
    Q: float


def _values(S) -> np.ndarray:
    return S.values if isinstance(S, IoUMatrix) else np.asarray(S, dtype=np.float64)


# Reductions across tracker rows use fsum or sorted inputs so that reordering
# the trackers leaves every term bit-identical.

def challenge_degree(S) -> float:
    v = _values(S)
    return 1.0 - math.fsum(v.ravel()) / v.size


def discriminative_ability(S, eta: float) -> float:
    v = _values(S)
    if v.shape[0] < 2:
        raise DataError("need >= 2 trackers to measure discrimination")
    sigma = float(np.std(np.sort(v.mean(axis=1))))
    return math.exp(eta * sigma)


def variation_mass(S, epsilon: float = 1e-6) -> float:
    """Natural log of the total absolute frame-to-frame IoU change, floored at ``epsilon``."""
    v = np.ascontiguousarray(_values(S))
    total = math.fsum(_kernels.abs_step_rows(v)) if v.shape[1] >= 2 else 0.0
    return math.log(max(total, epsilon))


def _minmax(x: np.ndarray, a: float, b: float) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.full_like(x, b)
    return a + (x - lo) * (b - a) / (hi - lo)


def variation_density(v_raw: Sequence[float], frame_counts: Sequence[int], params: QualityParams) -> np.ndarray:
    """Normalised variation mass over normalised log length, for every sequence of a corpus."""
    num = np.asarray(v_raw, dtype=np.float64)
    counts = np.asarray(frame_counts, dtype=np.float64)
    if num.shape != counts.shape or num.size == 0:
        raise DataError("variation_density needs matching, non-empty v_raw and frame_counts")
    if (counts < 1).any():
        raise DataError("frame counts must be positive")
    a, b = params.norm_min, params.norm_max
    return _minmax(num, a, b) / _minmax(np.log(counts), a, b)


def quality_score(C: float, D: float, V: float) -> float:
    return C * D * V


def _sequence_matrix(corpus, seq, trackers, pass_mode, include_first_frame) -> IoUMatrix:
    if pass_mode == "first":
        preds = corpus.predictions(seq.id, corpus.passes[0])
        if sorted(preds) != trackers:
            raise DataError(f"sequence {seq.id!r}: trackers {sorted(preds)} differ from {trackers}")
        return iou_matrix(seq, preds, include_first_frame)
    mats = []
    for k in corpus.passes:
        preds = corpus.predictions(seq.id, k)
        if sorted(preds) != trackers:
            raise DataError(f"sequence {seq.id!r} pass {k}: trackers {sorted(preds)} differ from {trackers}")
        mats.append(iou_matrix(seq, preds, include_first_frame).values)
    return IoUMatrix(np.mean(mats, axis=0), tuple(trackers), seq.id)


def score_corpus(
    corpus,
    params: QualityParams = QualityParams(),
    pass_mode: str = "first",
    include_first_frame: bool = True,
    threads: int = 1,
) -> list[QualityReport]:
    """Quality report for every sequence of ``corpus``, in sequence-id order.

    ``pass_mode="first"`` scores the lowest-numbered pass only; ``"mean"``
    averages the IoU matrices over all passes first.
    """
    if pass_mode not in ("first", "mean"):
        raise DataError(f"unknown pass mode {pass_mode!r}")
    if len(corpus) == 0:
        raise DataError("cannot score an empty corpus")
    trackers = corpus.trackers
    if len(trackers) < 2:
        raise DataError(f"need >= 2 trackers to score quality, corpus has {len(trackers)}")

    def per_sequence(seq):
        try:
            S = _sequence_matrix(corpus, seq, trackers, pass_mode, include_first_frame)
            return (
                challenge_degree(S),
                discriminative_ability(S, params.eta),
                variation_mass(S, params.epsilon),
            )
        except DataError as exc:
            msg = str(exc)
            raise DataError(msg if seq.id in msg else f"sequence {seq.id!r}: {msg}") from None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            terms = list(pool.map(per_sequence, corpus.sequences))
    else:
        terms = [per_sequence(s) for s in corpus.sequences]

    v_raw = [t[2] for t in terms]
    V = variation_density(v_raw, [s.frame_count for s in corpus.sequences], params)
    reports = []
    for seq, (c, d, vr), v in zip(corpus.sequences, terms, V):
        v = float(v)
        reports.append(QualityReport(seq.id, c, d, vr, v, quality_score(c, d, v)))
    return reports
