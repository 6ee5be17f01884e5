"""Command-line entry point: ``trackcurate {synth,score,select,evaluate,report}``.

Exit status is 0 on success, 1 on data or computation errors and 2 on usage
errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections import defaultdict
from pathlib import Path

from trackcurate import corpus as corpus_io
from trackcurate import metrics, plots
from trackcurate._kernels import BACKEND
from trackcurate.corpus import SCENARIOS, _write_json
from trackcurate.errors import DataError
from trackcurate.quality import QualityParams, score_corpus
from trackcurate.selection import (
    SelectionConfig,
    format_counts_table,
    load_selection,
    ranking_preservation,
    save_selection,
    select_informative,
)
from trackcurate.synth import SynthSpec, generate, write_tree

log = logging.getLogger("trackcurate")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _mix(text: str) -> dict[str, float]:
    out = {}
    for item in text.split(","):
        name, _, weight = item.partition("=")
        try:
            out[name.strip()] = float(weight) if weight else 1.0
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad scenario weight in {item!r}") from None
    return out


def _threads(text: str) -> int:
    if text == "auto":
        import os
        return os.cpu_count() or 1
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1 or 'auto'")
    return n


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.exists():
        raise argparse.ArgumentTypeError(f"path does not exist: {text}")
    return p


def _add_quality_flags(p: argparse.ArgumentParser) -> None:
    d = QualityParams()
    p.add_argument("--eta", type=float, default=d.eta, help="scale factor of the discrimination term (default %(default)s)")
    p.add_argument("--norm-min", type=float, default=d.norm_min, help="lower end of the min-max range (default %(default)s)")
    p.add_argument("--norm-max", type=float, default=d.norm_max, help="upper end of the min-max range (default %(default)s)")
    p.add_argument("--epsilon", type=float, default=d.epsilon, help="floor inside the variation log (default %(default)s)")
    p.add_argument("--quality-passes", choices=("first", "mean"), default="first",
                   help="score pass 1 only, or the mean IoU over all passes")


def _add_corpus_flags(p: argparse.ArgumentParser, results_required: bool = True) -> None:
    p.add_argument("--manifest", type=_existing, required=True, help="manifest JSON")
    p.add_argument("--results", type=_existing, required=results_required, help="results root <tracker>/pass<K>/<id>.txt")
    p.add_argument("--passes", type=int, default=None, help="number of passes to load (default: all found)")
    p.add_argument("--skip-init-frame", action="store_true", help="exclude frame 1 from all per-frame statistics")


def _add_selection_flags(p: argparse.ArgumentParser) -> None:
    d = SelectionConfig()
    p.add_argument("--top-fraction", type=float, default=d.top_fraction)
    p.add_argument("--quota", type=int, default=d.per_scenario_quota, help="sequences per scenario")
    p.add_argument("--paper-order", action="store_true", help="cut the top fraction before removing sub-scenario duplicates")
    p.add_argument("--no-dedupe", action="store_true", help="keep several sequences of one sub-scenario")
    p.add_argument("--ranking-metric", choices=("miou", "success_auc"), default=d.ranking_metric)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trackcurate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus (manifest, gt, results)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sequences", type=int, default=20)
    p.add_argument("--frames-min", type=int, default=20)
    p.add_argument("--frames-max", type=int, default=100)
    p.add_argument("--noise", type=_floats, default=(0.0, 4.0, 8.0, 12.0, 16.0), help="per-tracker jitter in pixels")
    p.add_argument("--absence-rate", type=float, default=0.0)
    p.add_argument("--passes", type=int, default=3)
    p.add_argument("--scenarios", type=_mix, default=None, help="e.g. 'uav=2,animal=1' (default: all nine, equal weight)")
    p.add_argument("--sub-scenarios", type=int, default=4, help="sub-scenario labels per scenario")
    p.add_argument("--source-dataset", default="synth")

    p = sub.add_parser("score", help="compute per-sequence quality reports")
    _add_corpus_flags(p)
    _add_quality_flags(p)
    p.add_argument("--out", type=Path, required=True, help="quality report JSON to write")
    p.add_argument("--threads", type=_threads, default=1)

    p = sub.add_parser("select", help="select an informative, scenario-balanced subset")
    _add_corpus_flags(p, results_required=False)
    p.add_argument("--quality", type=_existing, help="quality report JSON (otherwise scored from --results)")
    _add_quality_flags(p)
    _add_selection_flags(p)
    p.add_argument("--out", type=Path, required=True, help="selection JSON to write")
    p.add_argument("--threads", type=_threads, default=1)

    p = sub.add_parser("evaluate", help="per-dataset tracker scores, mean and NStd")
    p.add_argument("--manifest", type=_existing)
    p.add_argument("--results", type=_existing)
    p.add_argument("--precomputed", type=_existing,
                   help="CSV with columns dataset,sequence,tracker,miou[,pass] (scores in [0,1])")
    p.add_argument("--passes", type=int, default=None)
    p.add_argument("--skip-init-frame", action="store_true")
    p.add_argument("--selection", type=_existing, help="selection JSON; adds a subset-vs-full ranking comparison")
    p.add_argument("--ranking-metric", choices=("miou", "success_auc"), default="miou")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=_threads, default=1)

    p = sub.add_parser("report", help="challenge plots, per-scenario tables and ranking bars")
    _add_corpus_flags(p)
    p.add_argument("--selection", type=_existing)
    p.add_argument("--group-by", choices=("source_dataset", "scenario"), default="source_dataset")
    p.add_argument("--step", type=float, default=0.01, help="challenge-curve threshold step")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=_threads, default=1)
    return parser


def _quality_params(args) -> QualityParams:
    return QualityParams(eta=args.eta, norm_min=args.norm_min, norm_max=args.norm_max, epsilon=args.epsilon)


def _load(args):
    return corpus_io.load_corpus(args.manifest, args.results, passes=args.passes, threads=args.threads)


def cmd_synth(args) -> None:
    spec = SynthSpec(
        seed=args.seed,
        n_sequences=args.sequences,
        frames_range=(args.frames_min, args.frames_max),
        tracker_noise=args.noise,
        absence_rate=args.absence_rate,
        scenario_mix=args.scenarios or {s.value: 1.0 for s in SCENARIOS},
        passes=args.passes,
        sub_scenarios_per_scenario=args.sub_scenarios,
        source_dataset=args.source_dataset,
    )
    manifest = write_tree(generate(spec), args.out)
    print(f"wrote {manifest}")


def cmd_score(args) -> None:
    params = _quality_params(args)
    corpus = _load(args)
    log.debug("scoring %d sequences with %s kernels", len(corpus), BACKEND)
    reports = score_corpus(corpus, params, pass_mode=args.quality_passes,
                           include_first_frame=not args.skip_init_frame, threads=args.threads)
    corpus_io.save_quality_report(reports, args.out, params)
    print(f"scored {len(reports)} sequences -> {args.out}")


def cmd_select(args) -> None:
    config = SelectionConfig(
        top_fraction=args.top_fraction,
        per_scenario_quota=args.quota,
        dedupe_by_sub_scenario=not args.no_dedupe,
        paper_order=args.paper_order,
        ranking_metric=args.ranking_metric,
    )
    if args.quality is not None:
        corpus = corpus_io.load_manifest(args.manifest, threads=args.threads)
        reports, _ = corpus_io.load_quality_report(args.quality)
    elif args.results is not None:
        corpus = _load(args)
        reports = score_corpus(corpus, _quality_params(args), pass_mode=args.quality_passes,
                               include_first_frame=not args.skip_init_frame, threads=args.threads)
    else:
        raise DataError("select needs --quality or --results")
    outcome = select_informative(reports, corpus, config)
    save_selection(outcome, args.out)
    print(format_counts_table(outcome, config.per_scenario_quota))


def read_precomputed(path) -> dict[str, dict[str, dict[str, float]]]:
    """``{dataset: {sequence: {tracker: score}}}`` from a precomputed CSV; passes are averaged."""
    raw = defaultdict(lambda: defaultdict(lambda: defaultdict(list)))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"dataset", "sequence", "tracker", "miou"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise DataError(f"{path}: header must contain {sorted(need)}, got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                v = float(row["miou"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{lineno}: bad miou value {row['miou']!r}") from None
            if not 0 <= v <= 1:
                raise DataError(f"{path}:{lineno}: miou {v} outside [0, 1]")
            raw[row["dataset"]][row["sequence"]][row["tracker"]].append(v)
    if not raw:
        raise DataError(f"{path}: no rows")
    return {
        ds: {sid: {t: metrics.three_pass_aggregate(v) for t, v in sorted(trk.items())} for sid, trk in sorted(seqs.items())}
        for ds, seqs in sorted(raw.items())
    }


def _table(groups: dict[str, dict[str, dict[str, float]]]):
    rows, stats = {}, {}
    trackers = None
    for ds, per_seq in groups.items():
        scores = metrics.tracker_scores(per_seq)
        if trackers is None:
            trackers = sorted(scores)
        elif sorted(scores) != trackers:
            raise DataError(f"dataset {ds!r} has trackers {sorted(scores)}, expected {trackers}")
        vals = [scores[t] for t in trackers]
        rows[ds] = scores
        nstd = metrics.nstd_miou(vals) if len(vals) >= 2 else None
        stats[ds] = (metrics.dataset_mean_miou(vals), nstd)
    return rows, stats, trackers


def cmd_evaluate(args) -> None:
    metric = args.ranking_metric
    corpus = None
    if args.precomputed is not None:
        groups = read_precomputed(args.precomputed)
    elif args.manifest is not None and args.results is not None:
        corpus = _load(args)
        per_seq = metrics.sequence_scores(corpus, metric, include_first_frame=not args.skip_init_frame)
        groups = defaultdict(dict)
        for s in corpus.sequences:
            groups[s.source_dataset][s.id] = per_seq[s.id]
        groups = dict(sorted(groups.items()))
        groups["all"] = per_seq
    else:
        raise DataError("evaluate needs --precomputed, or both --manifest and --results")

    rows, stats, trackers = _table(groups)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    table = plots.score_table_csv(rows, trackers, stats).replace("mean_miou", f"mean_{metric}").replace("nstd_miou", f"nstd_{metric}")
    (out / "table.csv").write_text(table, encoding="utf-8")
    _write_json({
        "metric": metric,
        "trackers": trackers,
        "datasets": {
            ds: {"scores": rows[ds], "mean": stats[ds][0], "nstd_percent": stats[ds][1]} for ds in rows
        },
    }, out / "table.json")
    last = list(rows)[-1]
    series = {last: rows[last]}
    if args.selection is not None:
        if corpus is None:
            raise DataError("--selection needs --manifest and --results")
        outcome = load_selection(args.selection)
        report = ranking_preservation(corpus, outcome.selected, SelectionConfig(ranking_metric=metric),
                                      per_sequence=groups["all"])
        series = {"overall": report.scores_full, "selected": report.scores_subset}
        _write_json({"tau": report.tau, "rank_full": report.rank_full, "rank_subset": report.rank_subset,
                     "scores_full": report.scores_full, "scores_subset": report.scores_subset},
                    out / "ranking_preservation.json")
        print(f"kendall tau (selected vs overall) = {report.tau:.4f}")
    plots.write_ranking_plot(series, out, ylabel=metric)
    print(table, end="")


def cmd_report(args) -> None:
    corpus = _load(args)
    per_seq = metrics.sequence_scores(corpus, "miou", include_first_frame=not args.skip_init_frame)
    errors = defaultdict(list)
    by_scenario = defaultdict(dict)
    for s in corpus.sequences:
        scores = per_seq[s.id]
        err = 1.0 - sum(scores.values()) / len(scores)
        key = s.source_dataset if args.group_by == "source_dataset" else s.scenario.value
        errors[key].append(min(max(err, 0.0), 1.0))
        by_scenario[s.scenario.value][s.id] = scores
    curves = [metrics.challenge_curve(errors[k], args.step, label=k) for k in sorted(errors)]
    plots.write_challenge_plot(curves, args.out)

    scen_groups = {k: by_scenario[k.value] for k in SCENARIOS if k.value in by_scenario}
    rows, stats, trackers = _table(scen_groups)
    (args.out / "scenario_scores.csv").write_text(plots.score_table_csv(rows, trackers, stats), encoding="utf-8")

    if args.selection is not None:
        outcome = load_selection(args.selection)
        report = ranking_preservation(corpus, outcome.selected, per_sequence=per_seq)
        plots.write_ranking_plot({"overall": report.scores_full, "selected": report.scores_subset}, args.out)
    for c in curves:
        print(f"{c.label}: challenge AUC {c.auc:.3f}")


COMMANDS = {
    "synth": cmd_synth,
    "score": cmd_score,
    "select": cmd_select,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except DataError as exc:
        print(f"trackcurate {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"trackcurate {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
