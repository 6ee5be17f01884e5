"""Informative subset selection and ranking-preservation checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from trackcurate.corpus import SCENARIOS, Corpus, _read_json, _write_json
from trackcurate.errors import DataError, FormatError
from trackcurate.metrics import rank_trackers, sequence_scores, tracker_scores
from trackcurate.quality import QualityReport

SELECTION_VERSION = 1


@dataclass(frozen=True)
class SelectionConfig:
    top_fraction: float = 0.10
    per_scenario_quota: int = 20
    dedupe_by_sub_scenario: bool = True
    paper_order: bool = False
    ranking_metric: str = "miou"

    def __post_init__(self):
        if not 0 < self.top_fraction <= 1:
            raise DataError(f"top_fraction must be in (0, 1], got {self.top_fraction}")
        if self.per_scenario_quota < 1:
            raise DataError(f"per_scenario_quota must be >= 1, got {self.per_scenario_quota}")
        if self.ranking_metric not in ("miou", "success_auc"):
            raise DataError(f"ranking_metric must be 'miou' or 'success_auc', got {self.ranking_metric!r}")


@dataclass
class SelectionOutcome:
    selected: list[str]
    per_scenario_counts: dict[str, int]
    unmet_quotas: list[tuple[str, int]]
    provenance: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format_version": SELECTION_VERSION,
            "selected": list(self.selected),
            "per_scenario_counts": dict(self.per_scenario_counts),
            "unmet_quotas": [[s, n] for s, n in self.unmet_quotas],
            "provenance": {k: dict(v) for k, v in self.provenance.items()},
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SelectionOutcome":
        if doc.get("format_version") != SELECTION_VERSION:
            raise FormatError(f"unsupported selection format_version {doc.get('format_version')!r}")
        return cls(
            selected=list(doc["selected"]),
            per_scenario_counts=dict(doc["per_scenario_counts"]),
            unmet_quotas=[(s, int(n)) for s, n in doc["unmet_quotas"]],
            provenance={k: dict(v) for k, v in doc["provenance"].items()},
        )


def save_selection(outcome: SelectionOutcome, path) -> None:
    _write_json(outcome.to_dict(), path)


def load_selection(path) -> SelectionOutcome:
    doc = _read_json(path)
    try:
        return SelectionOutcome.from_dict(doc)
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed selection file ({exc!r})") from None


def rank_by_quality(reports: Sequence[QualityReport]) -> list[str]:
    """Sequence ids by descending Q, ties broken by id."""
    return [r.sequence_id for r in sorted(reports, key=lambda r: (-r.Q, r.sequence_id))]


def dedupe_sub_scenarios(ordered_ids: Sequence[str], corpus: Corpus) -> list[str]:
    """Keep the first id of every (scenario, sub_scenario) group, preserving order."""
    seen = set()
    out = []
    for sid in ordered_ids:
        s = corpus.sequence(sid)
        key = (s.scenario, s.sub_scenario)
        if key in seen:
            continue
        seen.add(key)
        out.append(sid)
    return out


def budget(n: int, top_fraction: float) -> int:
    # exact decimal arithmetic: floor(0.29 * 100) must be 29, not 28
    return math.floor(Fraction(repr(top_fraction)) * n)


def select_informative(reports: Sequence[QualityReport], corpus: Corpus, config: SelectionConfig) -> SelectionOutcome:
    """Pick high-quality sequences, then top up each scenario to its quota.

    Steps: rank by Q; dedupe sub-scenarios (before the cut by default, after
    it with ``paper_order``); take the best ``floor(top_fraction * n)``
    candidates, never exceeding a scenario's quota; fill scenarios that are
    short with their next-best unused sequences. Shortfalls that cannot be
    filled are reported in ``unmet_quotas``.
    """
    if len(corpus) == 0 or not reports:
        raise DataError("cannot select from an empty corpus")
    q = {r.sequence_id: r.Q for r in reports}
    missing = set(corpus.ids) - set(q)
    if missing:
        raise DataError(f"quality reports missing for sequences: {sorted(missing)[:5]}")
    known = set(corpus.ids)
    ranked = [sid for sid in rank_by_quality(reports) if sid in known]
    k = budget(len(ranked), config.top_fraction)
    dedupe = config.dedupe_by_sub_scenario

    if dedupe and not config.paper_order:
        candidates = dedupe_sub_scenarios(ranked, corpus)[:k]
    elif dedupe:
        candidates = dedupe_sub_scenarios(ranked[:k], corpus)
    else:
        candidates = ranked[:k]

    quota = config.per_scenario_quota
    counts = {s.value: 0 for s in SCENARIOS}
    groups = set()
    selected = []
    provenance = {}

    def take(sid, reason):
        s = corpus.sequence(sid)
        counts[s.scenario.value] += 1
        groups.add((s.scenario, s.sub_scenario))
        selected.append(sid)
        provenance[sid] = {"reason": reason, "Q": q[sid]}

    for sid in candidates:
        if counts[corpus.sequence(sid).scenario.value] < quota:
            take(sid, "top_quality")

    chosen = set(selected)
    unmet = []
    for scen in SCENARIOS:
        if counts[scen.value] >= quota:
            continue
        for sid in ranked:
            if counts[scen.value] >= quota:
                break
            s = corpus.sequence(sid)
            if s.scenario is not scen or sid in chosen:
                continue
            if dedupe and (s.scenario, s.sub_scenario) in groups:
                continue
            take(sid, "quota_fill")
            chosen.add(sid)
        if counts[scen.value] < quota:
            unmet.append((scen.value, quota - counts[scen.value]))

    return SelectionOutcome(selected, counts, unmet, provenance)


def kendall_tau(rank_a: Sequence, rank_b: Sequence) -> float:
    """Kendall's tau between two rankings of the same items (no ties)."""
    if len(rank_a) != len(set(rank_a)) or len(rank_b) != len(set(rank_b)):
        raise DataError("rankings must not contain duplicates")
    if set(rank_a) != set(rank_b):
        raise DataError("rankings must permute the same set of ids")
    n = len(rank_a)
    if n < 2:
        raise DataError("kendall_tau needs at least two items")
    pos_b = {item: i for i, item in enumerate(rank_b)}
    seq = [pos_b[item] for item in rank_a]
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            if seq[i] < seq[j]:
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / (n * (n - 1) / 2)


@dataclass
class RankingReport:
    tau: float
    rank_full: list[str]
    rank_subset: list[str]
    scores_full: dict[str, float]
    scores_subset: dict[str, float]


def ranking_preservation(
    corpus: Corpus,
    subset_ids: Sequence[str],
    config: SelectionConfig = SelectionConfig(),
    per_sequence: Mapping[str, Mapping[str, float]] | None = None,
    include_first_frame: bool = True,
) -> RankingReport:
    """Compare tracker rankings on the full corpus and on ``subset_ids``.

    ``per_sequence`` may carry precomputed ``{sequence: {tracker: score}}``
    values; otherwise they are computed from the corpus results.
    """
    unknown = set(subset_ids) - set(corpus.ids)
    if unknown:
        raise DataError(f"subset contains unknown sequences: {sorted(unknown)[:5]}")
    if not subset_ids:
        raise DataError("subset is empty")
    if per_sequence is None:
        per_sequence = sequence_scores(corpus, config.ranking_metric, include_first_frame)
    full = tracker_scores(per_sequence)
    sub = tracker_scores(per_sequence, subset_ids)
    rf, rs = rank_trackers(full), rank_trackers(sub)
    return RankingReport(kendall_tau(rf, rs), rf, rs, full, sub)


def format_counts_table(outcome: SelectionOutcome, quota: int) -> str:
    unmet = dict(outcome.unmet_quotas)
    lines = [f"{'scenario':<15}{'selected':>9}{'quota':>7}{'short':>7}"]
    for scen in SCENARIOS:
        n = outcome.per_scenario_counts.get(scen.value, 0)
        lines.append(f"{scen.value:<15}{n:>9}{quota:>7}{unmet.get(scen.value, 0):>7}")
    lines.append(f"{'total':<15}{len(outcome.selected):>9}")
    return "\n".join(lines)
