"""Naive reference implementations used as test oracles.

Plain Python loops, exact fractions where cheap. Nothing here imports the
numeric code under test.
"""
import math
import statistics
from fractions import Fraction


def iou_exact(a, b):
    """IoU of two xywh boxes with rational arithmetic."""
    ax, ay, aw, ah = (Fraction(v) for v in a)
    bx, by, bw, bh = (Fraction(v) for v in b)

    def overlap(lo1, len1, lo2, len2):
        lo = max(lo1, lo2)
        hi = min(lo1 + len1, lo2 + len2)
        return hi - lo if hi > lo else Fraction(0)

    inter = overlap(ax, aw, bx, bw) * overlap(ay, ah, by, bh)
    union = aw * ah + bw * bh - inter
    return Fraction(0) if union == 0 else inter / union


def iou_float(a, b):
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    inter = iw * ih if iw > 0 and ih > 0 else 0.0
    union = aw * ah + bw * bh - inter
    return 0.0 if union <= 0 else inter / union


def is_nan_row(row):
    return any(v != v for v in row)


def naive_matrix(gt_rows, pred_rows_by_tracker):
    """List-of-lists IoU matrix; trackers in sorted-name order, gt-absent frames dropped."""
    names = sorted(pred_rows_by_tracker)
    S = []
    for n in names:
        row = []
        for g, p in zip(gt_rows, pred_rows_by_tracker[n]):
            if is_nan_row(g):
                continue
            row.append(0.0 if is_nan_row(p) else iou_float(g, p))
        S.append(row)
    return S


def naive_terms(S, eta, epsilon):
    n, m = len(S), len(S[0])
    total = 0.0
    for row in S:
        for v in row:
            total += v
    C = 1.0 - total / (n * m)
    means = [sum(row) / m for row in S]
    D = math.exp(eta * statistics.pstdev(means))
    mass = 0.0
    for row in S:
        for j in range(m - 1):
            mass += abs(row[j + 1] - row[j])
    V_raw = math.log(max(mass, epsilon))
    return C, D, V_raw


def naive_minmax(xs, a, b):
    lo, hi = min(xs), max(xs)
    if lo == hi:
        return [b for _ in xs]
    return [a + (x - lo) * (b - a) / (hi - lo) for x in xs]


def naive_quality(sequences, eta=5.0, a=0.1, b=1.0, epsilon=1e-6):
    """sequences: list of (id, gt_rows, {tracker: pred_rows}). Returns {id: (C, D, V_raw, V, Q)}."""
    terms = []
    for sid, gt, preds in sequences:
        terms.append((sid, len(gt)) + naive_terms(naive_matrix(gt, preds), eta, epsilon))
    num = naive_minmax([t[4] for t in terms], a, b)
    den = naive_minmax([math.log(t[1]) for t in terms], a, b)
    out = {}
    for t, nu, de in zip(terms, num, den):
        sid, _, C, D, V_raw = t
        V = nu / de
        out[sid] = (C, D, V_raw, V, C * D * V)
    return out


def naive_success_auc(row, n=20):
    hits = 0
    for k in range(n + 1):
        tau = k / n
        hits += sum(1 for v in row if v > tau)
    return hits / ((n + 1) * len(row))


def naive_kendall(a, b):
    pos = {x: i for i, x in enumerate(b)}
    c = d = 0
    for i in range(len(a)):
        for j in range(len(a)):
            if i < j:
                if pos[a[i]] < pos[a[j]]:
                    c += 1
                else:
                    d += 1
    return (c - d) / (len(a) * (len(a) - 1) / 2)


SCENARIO_ORDER = ("human-body", "human-part", "animal", "vehicle", "sign-and-logo",
                  "sport-ball", "3d-object", "uav", "cartoon")


def _best_per_group(ids, q, group):
    best = {}
    for i in ids:
        g = group[i]
        if g not in best or (-q[i], i) < (-q[best[g]], best[g]):
            best[g] = i
    keep = set(best.values())
    return [i for i in ids if i in keep]


def naive_select(q, scenario, sub, top_fraction, quota, dedupe, paper_order):
    """Brute-force sort + group-by + quota fill. Returns (selected, unmet)."""
    group = {i: (scenario[i], sub[i]) for i in q}
    order = sorted(q, key=lambda i: (-q[i], i))
    k = math.floor(Fraction(repr(top_fraction)) * len(order))
    if not dedupe:
        cand = order[:k]
    elif paper_order:
        cand = _best_per_group(order[:k], q, group)
    else:
        cand = _best_per_group(order, q, group)[:k]
    per_scen = {s: [] for s in SCENARIO_ORDER}
    for i in cand:
        if len(per_scen[scenario[i]]) < quota:
            per_scen[scenario[i]].append(i)
    selected = [i for i in cand if i in per_scen[scenario[i]]]
    unmet = []
    for s in SCENARIO_ORDER:
        taken = per_scen[s]
        rest = [i for i in order if scenario[i] == s and i not in taken]
        if dedupe:
            used = {group[i] for i in taken}
            rest = _best_per_group([i for i in rest if group[i] not in used], q, group)
        fill = rest[: max(0, quota - len(taken))]
        selected += fill
        if len(taken) + len(fill) < quota:
            unmet.append((s, quota - len(taken) - len(fill)))
    return selected, unmet


def published_rows():
    """Published per-tracker mIoU rows (percent) with the printed mean and NStd."""
    import csv
    from pathlib import Path

    with open(Path(__file__).parent / "fixtures" / "published_miou.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for r in reader:
            rows.append((r[0], dict(zip(header[1:11], map(float, r[1:11]))), float(r[11]), float(r[12])))
    return rows
