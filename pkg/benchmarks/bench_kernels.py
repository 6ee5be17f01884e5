"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--frames 500] [--trackers 10] [--repeat 20]

Times each kernel on one (trackers x frames) sequence, then runs
``score_corpus`` end to end in a subprocess per backend.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from trackcurate import _kernels

END_TO_END = """
import time
from trackcurate import BACKEND
from trackcurate.quality import score_corpus
from trackcurate.synth import SynthSpec, generate
corpus = generate(SynthSpec(seed=1, n_sequences={n}, frames_range=({m}, {m}), tracker_noise=tuple(range({k}))))
score_corpus(corpus)
t = time.perf_counter()
score_corpus(corpus)
print(BACKEND, time.perf_counter() - t)
"""


def case(k, m, seed=0):
    rng = np.random.default_rng(seed)
    gt = np.column_stack([rng.uniform(0, 1000, (m, 2)), rng.uniform(20, 200, (m, 2))])
    pred = gt[None] + rng.uniform(-10, 10, (k, m, 4))
    pred[..., 2:] = np.abs(pred[..., 2:])
    return gt, pred


def bench(fn, *args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=500)
    ap.add_argument("--trackers", type=int, default=10)
    ap.add_argument("--sequences", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    gt, pred = case(args.trackers, args.frames)
    S = _kernels.iou_rows_numpy(gt, pred)
    rows = [("iou_rows", "numpy", bench(_kernels.iou_rows_numpy, gt, pred, repeat=args.repeat)),
            ("abs_step_rows", "numpy", bench(_kernels.abs_step_rows_numpy, S, repeat=args.repeat))]
    if _kernels.HAS_NUMBA:
        rows += [("iou_rows", "numba", bench(_kernels.iou_rows_numba, gt, pred, repeat=args.repeat)),
                 ("abs_step_rows", "numba", bench(_kernels.abs_step_rows_numba, S, repeat=args.repeat))]
    print(f"kernels on {args.trackers} trackers x {args.frames} frames (best of {args.repeat})")
    for name, backend, t in sorted(rows):
        print(f"  {name:<14} {backend:<6} {t * 1e6:10.1f} us")

    print(f"score_corpus on {args.sequences} x {args.trackers} x {args.frames}")
    code = END_TO_END.format(n=args.sequences, m=args.frames, k=args.trackers)
    for flag in ("0", "1"):
        env = dict(os.environ, TRACKCURATE_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:<6} {float(secs):8.3f} s")


if __name__ == "__main__":
    main()
