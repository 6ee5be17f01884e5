"""Seeded synthetic corpora for oracle-based testing.

All randomness comes from a single ``numpy.random.Generator(PCG64(seed))``
stream, consumed in a fixed order: ground truth for every sequence, then
predictions by (pass, tracker, sequence). PCG64 output is specified by
numpy independently of platform, so a seed pins the corpus exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from trackcurate.corpus import SCENARIOS, Corpus, ResultSet, Scenario, SequenceRecord, save_manifest, save_results
from trackcurate.errors import DataError
from trackcurate.geometry import Trajectory

CANVAS = (1280.0, 720.0)
BOX_SIZE = (20.0, 200.0)
MAX_STEP = 10.0


def _default_mix() -> dict[str, float]:
    return {s.value: 1.0 for s in SCENARIOS}


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n_sequences: int = 10
    frames_range: tuple[int, int] = (20, 50)
    tracker_noise: tuple[float, ...] = (0.0, 5.0, 20.0)
    absence_rate: float = 0.0
    scenario_mix: Mapping[str, float] = field(default_factory=_default_mix)
    passes: int = 1
    sub_scenarios_per_scenario: int = 4
    source_dataset: str = "synth"

    def __post_init__(self):
        lo, hi = self.frames_range
        if lo < 2 or hi < lo:
            raise DataError(f"frames_range must satisfy 2 <= min <= max, got {self.frames_range}")
        if self.n_sequences < 1:
            raise DataError("n_sequences must be >= 1")
        if len(self.tracker_noise) < 1:
            raise DataError("need at least one tracker")
        if any(n < 0 for n in self.tracker_noise):
            raise DataError(f"tracker noise must be >= 0, got {self.tracker_noise}")
        if not 0 <= self.absence_rate < 1:
            raise DataError(f"absence_rate must be in [0, 1), got {self.absence_rate}")
        mix = {Scenario.parse(k).value: float(v) for k, v in self.scenario_mix.items()}
        if any(v < 0 for v in mix.values()) or sum(mix.values()) <= 0:
            raise DataError("scenario weights must be non-negative with a positive sum")
        object.__setattr__(self, "scenario_mix", mix)
        if self.passes < 1:
            raise DataError("passes must be >= 1")
        if self.sub_scenarios_per_scenario < 1:
            raise DataError("sub_scenarios_per_scenario must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DataError("seed must be a 64-bit unsigned integer")

    @property
    def n_trackers(self) -> int:
        return len(self.tracker_noise)


def _reflect(v, lo, hi):
    if v < lo:
        v = 2 * lo - v
    elif v > hi:
        v = 2 * hi - v
    return min(max(v, lo), hi)


def _walk(rng: np.random.Generator, m: int) -> np.ndarray:
    W, H = CANVAS
    smin, smax = BOX_SIZE
    w, h = rng.uniform(smin, smax, size=2)
    x = rng.uniform(0, W - w)
    y = rng.uniform(0, H - h)
    steps = rng.uniform(-MAX_STEP, MAX_STEP, size=(m - 1, 4))
    boxes = np.empty((m, 4))
    boxes[0] = (x, y, w, h)
    for j in range(1, m):
        dx, dy, dw, dh = steps[j - 1]
        w = _reflect(w + dw, smin, smax)
        h = _reflect(h + dh, smin, smax)
        x = _reflect(x + dx, 0.0, W - w)
        y = _reflect(y + dy, 0.0, H - h)
        boxes[j] = (x, y, w, h)
    return boxes


def tracker_name(i: int) -> str:
    return f"trk{i:02d}"


def generate(spec: SynthSpec) -> Corpus:
    """Build a corpus with ground truth and jittered tracker predictions for every pass."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    names = sorted(spec.scenario_mix)
    weights = np.array([spec.scenario_mix[n] for n in names])
    weights = weights / weights.sum()
    width = max(4, len(str(spec.n_sequences - 1)))
    lo, hi = spec.frames_range

    sequences = []
    for i in range(spec.n_sequences):
        scen = names[rng.choice(len(names), p=weights)]
        sub = int(rng.integers(spec.sub_scenarios_per_scenario))
        m = int(rng.integers(lo, hi + 1))
        sequences.append(SequenceRecord(
            id=f"seq{i:0{width}d}",
            scenario=Scenario(scen),
            sub_scenario=f"{scen}-{sub}",
            source_dataset=spec.source_dataset,
            gt=Trajectory(_walk(rng, m)),
        ))

    result_sets = []
    for k in range(1, spec.passes + 1):
        for t, noise in enumerate(spec.tracker_noise):
            trajs = {}
            for seq in sequences:
                gt = seq.gt.boxes
                pred = gt + rng.uniform(-1.0, 1.0, size=gt.shape) * noise
                np.maximum(pred[:, 2:], 0.0, out=pred[:, 2:])
                if spec.absence_rate > 0:
                    pred[rng.random(len(gt)) < spec.absence_rate] = np.nan
                trajs[seq.id] = Trajectory(pred)
            result_sets.append(ResultSet(tracker_name(t), k, trajs))
    return Corpus(tuple(sequences), tuple(result_sets))


def write_tree(corpus: Corpus, out_dir) -> Path:
    """Write ``manifest.json``, ``gt/`` and ``results/`` under ``out_dir``; returns the manifest path."""
    out = Path(out_dir)
    manifest = out / "manifest.json"
    save_manifest(corpus, manifest)
    save_results(corpus.result_sets, out / "results")
    return manifest
