"""CSV and standalone SVG output for challenge curves, ranking bars and score tables."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from trackcurate.errors import DataError
from trackcurate.metrics import ChallengeCurve, rank_trackers

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 190, 30, 60


def _out_dir(out_dir) -> Path:
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {path}: {exc.strerror}") from None
    return path


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _fmt(v: float) -> str:
    return f"{v:g}"


def _axes(xlabel: str, ylabel: str, title: str, yticks: Sequence[float], ymax: float) -> list[str]:
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(xlabel)}</text>',
        f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in yticks:
        y = TOP + ph * (1 - t / ymax)
        parts.append(f'<line x1="{LEFT - 4}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{LEFT - 7}" y="{y + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="10">{_fmt(t)}</text>'
        )
    return parts


def _legend(entries: Sequence[tuple[str, str]]) -> list[str]:
    parts = []
    x = WIDTH - RIGHT + 12
    for k, (label, color) in enumerate(entries):
        y = TOP + 10 + 18 * k
        parts.append(f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" stroke="{color}" stroke-width="3"/>')
        parts.append(f'<text x="{x + 24}" y="{y + 4}" font-family="sans-serif" font-size="11">{escape(label)}</text>')
    return parts


def challenge_svg(curves: Sequence[ChallengeCurve], title: str = "Challenge plot") -> str:
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    ticks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    parts = _axes("mIoU error threshold", "ratio of challenge sequences", title, ticks, 1.0)
    for t in ticks:
        x = LEFT + pw * t
        parts.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 4}" stroke="black"/>')
        parts.append(
            f'<text x="{x:.2f}" y="{TOP + ph + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{_fmt(t)}</text>'
        )
    legend = []
    for k, c in enumerate(curves):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(
            f"{LEFT + pw * t:.2f},{TOP + ph * (1 - f):.2f}" for t, f in zip(c.thresholds, c.fractions)
        )
        name = c.label or f"series {k + 1}"
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"><title>{escape(name)}</title></polyline>')
        legend.append((f"{name} (AUC {c.auc:.3f})", color))
    parts += _legend(legend)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def challenge_csv(curves: Sequence[ChallengeCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "threshold", "fraction"])
    for k, c in enumerate(curves):
        name = c.label or f"series {k + 1}"
        for t, f in zip(c.thresholds, c.fractions):
            w.writerow([name, repr(float(t)), repr(float(f))])
    return buf.getvalue()


def write_challenge_plot(curves: Sequence[ChallengeCurve], out_dir, name: str = "challenge") -> list[Path]:
    if not curves:
        raise DataError("no challenge curves to plot")
    out = _out_dir(out_dir)
    paths = [out / f"{name}.csv", out / f"{name}.svg"]
    _write(paths[0], challenge_csv(curves))
    _write(paths[1], challenge_svg(curves))
    return paths


def _bar_order(series: Mapping[str, Mapping[str, float]]) -> list[str]:
    first = next(iter(series.values()))
    return rank_trackers(first)


def ranking_csv(series: Mapping[str, Mapping[str, float]]) -> str:
    """One row per tracker in rank order of the first series, one column per series."""
    order = _bar_order(series)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tracker", *series])
    for t in order:
        w.writerow([t, *(repr(float(s[t])) for s in series.values())])
    return buf.getvalue()


def ranking_svg(series: Mapping[str, Mapping[str, float]], ylabel: str = "mIoU", title: str = "Tracker ranking") -> str:
    order = _bar_order(series)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    ticks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    parts = _axes("tracker", ylabel, title, ticks, 1.0)
    n_groups, n_series = len(order), len(series)
    gw = pw / max(n_groups, 1)
    bw = gw * 0.8 / n_series
    legend = []
    for k, (sname, scores) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        legend.append((sname, color))
        for g, t in enumerate(order):
            v = min(max(float(scores[t]), 0.0), 1.0)
            x = LEFT + g * gw + gw * 0.1 + k * bw
            parts.append(
                f'<rect x="{x:.2f}" y="{TOP + ph * (1 - v):.2f}" width="{bw:.2f}" height="{ph * v:.2f}" fill="{color}">'
                f"<title>{escape(sname)} {escape(t)} {v:.3f}</title></rect>"
            )
    for g, t in enumerate(order):
        x = LEFT + g * gw + gw / 2
        parts.append(
            f'<text x="{x:.2f}" y="{TOP + ph + 14}" text-anchor="middle" font-family="sans-serif" font-size="10">{escape(t)}</text>'
        )
    parts += _legend(legend)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_ranking_plot(series: Mapping[str, Mapping[str, float]], out_dir, name: str = "ranking", ylabel: str = "mIoU") -> list[Path]:
    if not series:
        raise DataError("no ranking series to plot")
    out = _out_dir(out_dir)
    paths = [out / f"{name}.csv", out / f"{name}.svg"]
    _write(paths[0], ranking_csv(series))
    _write(paths[1], ranking_svg(series, ylabel=ylabel))
    return paths


def score_table_csv(rows: Mapping[str, Mapping[str, float]], trackers: Sequence[str], stats: Mapping[str, tuple[float, float]]) -> str:
    """Dataset rows x tracker columns plus mean mIoU and NStd, rendered x100 with one decimal.

    ``stats`` maps dataset -> (mean, nstd_percent); NStd is printed with two decimals.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", *trackers, "mean_miou", "nstd_miou"])
    for ds, scores in rows.items():
        mean, nstd = stats[ds]
        nstd_txt = "" if nstd is None else f"{nstd:.2f}"
        w.writerow([ds, *(f"{100 * scores[t]:.1f}" for t in trackers), f"{100 * mean:.1f}", nstd_txt])
    return buf.getvalue()
