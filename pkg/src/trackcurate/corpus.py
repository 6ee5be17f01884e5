"""Sequence metadata, scenario taxonomy and on-disk formats.

Files handled here:

* manifest (JSON): ``{"format_version": 1, "sequences": [{id, scenario,
  sub_scenario, source_dataset, gt_path, frame_count}, ...]}``; ``gt_path`` is
  relative to the manifest's directory.
* box files: one frame per line, ``x,y,w,h``. Whitespace or tabs are accepted
  as separators on read. ``NaN,NaN,NaN,NaN`` or an empty line is an absent
  frame. Commas and ``NaN`` are always written.
* results tree: ``<root>/<tracker>/pass<K>/<sequence_id>.txt``.
* quality report (JSON): header ``format_version, eta, norm_min, norm_max,
  epsilon`` and a ``reports`` array of ``{id, C, D, V_raw, V, Q}``.
"""
from __future__ import annotations

import enum
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from trackcurate.errors import DataError, FormatError
from trackcurate.geometry import Trajectory

MANIFEST_VERSION = 1
REPORT_VERSION = 1

_PASS_DIR = re.compile(r"^pass(\d+)$")


class Scenario(str, enum.Enum):
    HUMAN_BODY = "human-body"
    HUMAN_PART = "human-part"
    ANIMAL = "animal"
    VEHICLE = "vehicle"
    SIGN_AND_LOGO = "sign-and-logo"
    SPORT_BALL = "sport-ball"
    OBJECT_3D = "3d-object"
    UAV = "uav"
    CARTOON = "cartoon"

    @classmethod
    def parse(cls, name: str) -> "Scenario":
        key = str(name).strip().lower().replace("_", "-").replace(" ", "-")
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise DataError(f"unknown scenario {name!r}; valid scenarios are: {valid}") from None

    def __str__(self) -> str:
        return self.value


SCENARIOS = tuple(Scenario)


@dataclass(frozen=True)
class SequenceRecord:
    id: str
    scenario: Scenario
    sub_scenario: str
    source_dataset: str
    gt: Trajectory
    gt_path: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.id:
            raise DataError("sequence id must be non-empty")
        if not self.sub_scenario:
            raise DataError(f"sequence {self.id}: sub_scenario must be non-empty")
        if not isinstance(self.scenario, Scenario):
            object.__setattr__(self, "scenario", Scenario.parse(self.scenario))

    @property
    def frame_count(self) -> int:
        return len(self.gt)


@dataclass(frozen=True)
class ResultSet:
    """Predictions of one tracker in one evaluation pass, keyed by sequence id."""

    tracker: str
    pass_index: int
    trajectories: Mapping[str, Trajectory]

    def __post_init__(self):
        if self.pass_index < 1:
            raise DataError(f"pass index must be >= 1, got {self.pass_index}")
        object.__setattr__(self, "trajectories", dict(sorted(self.trajectories.items())))


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of sequences plus tracker results, in canonical order."""

    sequences: tuple[SequenceRecord, ...]
    result_sets: tuple[ResultSet, ...] = ()

    def __post_init__(self):
        seqs = tuple(sorted(self.sequences, key=lambda s: s.id))
        ids = [s.id for s in seqs]
        for a, b in zip(ids, ids[1:]):
            if a == b:
                raise DataError(f"duplicate sequence id {a!r}")
        rsets = tuple(sorted(self.result_sets, key=lambda r: (r.tracker, r.pass_index)))
        seen = set()
        lengths = {s.id: s.frame_count for s in seqs}
        for rs in rsets:
            key = (rs.tracker, rs.pass_index)
            if key in seen:
                raise DataError(f"duplicate result set for tracker {rs.tracker!r} pass {rs.pass_index}")
            seen.add(key)
            for sid, traj in rs.trajectories.items():
                if sid not in lengths:
                    raise DataError(f"tracker {rs.tracker!r} pass {rs.pass_index}: unknown sequence {sid!r}")
                if len(traj) != lengths[sid]:
                    raise DataError(
                        f"tracker {rs.tracker!r} pass {rs.pass_index} sequence {sid!r}: "
                        f"expected {lengths[sid]} frames, got {len(traj)}"
                    )
        object.__setattr__(self, "sequences", seqs)
        object.__setattr__(self, "result_sets", rsets)
        object.__setattr__(self, "_by_id", {s.id: s for s in seqs})

    def __len__(self) -> int:
        return len(self.sequences)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.sequences]

    def sequence(self, seq_id: str) -> SequenceRecord:
        return self._by_id[seq_id]

    @property
    def trackers(self) -> list[str]:
        return sorted({r.tracker for r in self.result_sets})

    @property
    def passes(self) -> list[int]:
        return sorted({r.pass_index for r in self.result_sets})

    def with_results(self, result_sets: Iterable[ResultSet]) -> "Corpus":
        return Corpus(self.sequences, tuple(result_sets))

    def subset(self, ids: Iterable[str]) -> "Corpus":
        keep = set(ids)
        missing = keep - set(self.ids)
        if missing:
            raise DataError(f"subset contains unknown sequences: {sorted(missing)}")
        seqs = tuple(s for s in self.sequences if s.id in keep)
        rsets = tuple(
            ResultSet(r.tracker, r.pass_index, {k: v for k, v in r.trajectories.items() if k in keep})
            for r in self.result_sets
        )
        return Corpus(seqs, rsets)

    def predictions(self, seq_id: str, pass_index: int) -> dict[str, Trajectory]:
        """Tracker name -> trajectory for one sequence and pass, in tracker order."""
        out = {}
        for r in self.result_sets:
            if r.pass_index == pass_index and seq_id in r.trajectories:
                out[r.tracker] = r.trajectories[seq_id]
        return out


# -- box files ---------------------------------------------------------------

def parse_boxes(text: str, source: str = "<string>") -> np.ndarray:
    """Parse box-file text into an (M, 4) float array with NaN rows for absent frames."""
    lines = text.splitlines()
    out = np.empty((len(lines), 4), dtype=np.float64)
    for i, line in enumerate(lines):
        s = line.strip()
        if not s:
            out[i] = np.nan
            continue
        parts = s.split(",") if "," in s else s.split()
        if len(parts) != 4:
            raise FormatError(f"{source}:{i + 1}: expected 4 values 'x,y,w,h', got {line!r}")
        try:
            out[i] = [float(p) for p in parts]
        except ValueError:
            raise FormatError(f"{source}:{i + 1}: non-numeric value in {line!r}") from None
    return out


def read_trajectory(path) -> Trajectory:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    boxes = parse_boxes(text, str(path))
    if len(boxes) == 0:
        raise FormatError(f"{path}: file has no frames")
    try:
        return Trajectory(boxes)
    except DataError as exc:
        raise FormatError(f"{path}: {exc}") from None


def format_boxes(traj: Trajectory) -> str:
    rows = []
    for row in traj.boxes:
        if np.isnan(row[0]):
            rows.append("NaN,NaN,NaN,NaN")
        else:
            rows.append(",".join(repr(float(v)) for v in row))
    return "\n".join(rows) + "\n"


def write_trajectory(traj: Trajectory, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_boxes(traj), encoding="utf-8")


# -- JSON helpers ------------------------------------------------------------

def _read_json(path) -> object:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        bad_line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise FormatError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg} at byte offset {offset}: {bad_line.strip()!r}"
        ) from None


def _write_json(obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


# -- manifest ----------------------------------------------------------------

_MANIFEST_FIELDS = ("id", "scenario", "sub_scenario", "source_dataset", "gt_path", "frame_count")


def load_manifest(path, threads: int = 1) -> Corpus:
    """Read a manifest and its ground-truth files into a result-less Corpus."""
    path = Path(path)
    doc = _read_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("sequences"), list):
        raise FormatError(f"{path}: manifest must be an object with a 'sequences' array")
    version = doc.get("format_version", MANIFEST_VERSION)
    if version != MANIFEST_VERSION:
        raise FormatError(f"{path}: unsupported manifest format_version {version!r}")
    entries = doc["sequences"]
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise FormatError(f"{path}: sequence entry {k} is not an object: {entry!r}")
        missing = [f for f in _MANIFEST_FIELDS if f not in entry]
        if missing:
            raise FormatError(f"{path}: sequence entry {k} ({entry.get('id', '?')}) lacks fields {missing}")
        if not isinstance(entry["frame_count"], int) or entry["frame_count"] < 1:
            raise FormatError(f"{path}: sequence {entry['id']}: frame_count must be a positive integer")
        Scenario.parse(entry["scenario"])

    base = path.parent

    def load_one(entry):
        gt = read_trajectory(base / entry["gt_path"])
        if len(gt) != entry["frame_count"]:
            raise DataError(
                f"sequence {entry['id']}: ground truth has {len(gt)} frames, manifest says {entry['frame_count']}"
            )
        return SequenceRecord(
            id=str(entry["id"]),
            scenario=Scenario.parse(entry["scenario"]),
            sub_scenario=str(entry["sub_scenario"]),
            source_dataset=str(entry["source_dataset"]),
            gt=gt,
            gt_path=str(entry["gt_path"]),
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        records = list(pool.map(load_one, entries))
    return Corpus(tuple(records))


def save_manifest(corpus: Corpus, path, gt_dir: str = "gt") -> None:
    """Write a manifest plus one ground-truth file per sequence under ``gt_dir``."""
    path = Path(path)
    entries = []
    for s in corpus.sequences:
        rel = f"{gt_dir}/{s.id}.txt"
        write_trajectory(s.gt, path.parent / rel)
        entries.append({
            "id": s.id,
            "scenario": s.scenario.value,
            "sub_scenario": s.sub_scenario,
            "source_dataset": s.source_dataset,
            "gt_path": rel,
            "frame_count": s.frame_count,
        })
    _write_json({"format_version": MANIFEST_VERSION, "sequences": entries}, path)


# -- results -----------------------------------------------------------------

def load_results(root, corpus: Corpus, passes: Optional[int] = None, threads: int = 1) -> list[ResultSet]:
    """Read ``<root>/<tracker>/pass<K>/<id>.txt`` for every tracker, pass and sequence.

    With ``passes`` set, exactly passes 1..P are read and any missing pass
    directory is an error; otherwise every pass directory found is read.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"results directory {root} does not exist")
    trackers = sorted(p.name for p in root.iterdir() if p.is_dir())
    if not trackers:
        raise DataError(f"results directory {root} contains no tracker directories")
    jobs = []
    for trk in trackers:
        found = {}
        for p in (root / trk).iterdir():
            m = _PASS_DIR.match(p.name)
            if m and p.is_dir():
                found[int(m.group(1))] = p
        if passes is not None:
            wanted = list(range(1, passes + 1))
            for k in wanted:
                if k not in found:
                    raise DataError(f"tracker {trk!r}: missing directory {root / trk / f'pass{k}'}")
        else:
            wanted = sorted(found)
            if not wanted:
                raise DataError(f"tracker {trk!r}: no pass<K> directories under {root / trk}")
        for k in wanted:
            jobs.append((trk, k, found[k]))

    def load_one(job):
        trk, k, pdir = job
        trajs = {}
        for s in corpus.sequences:
            f = pdir / f"{s.id}.txt"
            if not f.is_file():
                raise DataError(f"tracker {trk!r} pass {k}: missing result file for sequence {s.id!r} ({f})")
            traj = read_trajectory(f)
            if len(traj) != s.frame_count:
                raise DataError(
                    f"tracker {trk!r} pass {k} sequence {s.id!r}: expected {s.frame_count} frames, "
                    f"got {len(traj)} ({f})"
                )
            trajs[s.id] = traj
        return ResultSet(trk, k, trajs)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(load_one, jobs))


def save_results(result_sets: Sequence[ResultSet], root) -> None:
    root = Path(root)
    for rs in result_sets:
        for sid, traj in rs.trajectories.items():
            write_trajectory(traj, root / rs.tracker / f"pass{rs.pass_index}" / f"{sid}.txt")


def load_corpus(manifest, results=None, passes: Optional[int] = None, threads: int = 1) -> Corpus:
    corpus = load_manifest(manifest, threads=threads)
    if results is None:
        return corpus
    return corpus.with_results(load_results(results, corpus, passes=passes, threads=threads))


# -- quality reports ---------------------------------------------------------

def save_quality_report(reports, path, params=None) -> None:
    from trackcurate.quality import QualityParams

    params = params or QualityParams()
    doc = {
        "format_version": REPORT_VERSION,
        "eta": params.eta,
        "norm_min": params.norm_min,
        "norm_max": params.norm_max,
        "epsilon": params.epsilon,
        "reports": [
            {"id": r.sequence_id, "C": r.C, "D": r.D, "V_raw": r.V_raw, "V": r.V, "Q": r.Q}
            for r in reports
        ],
    }
    _write_json(doc, path)


def load_quality_report(path):
    """Return ``(reports, params)`` from a quality report file."""
    from trackcurate.quality import QualityParams, QualityReport

    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: quality report must be a JSON object")
    version = doc.get("format_version")
    if version != REPORT_VERSION:
        raise FormatError(f"{path}: format_version {version!r} does not match supported version {REPORT_VERSION}")
    try:
        params = QualityParams(
            eta=doc["eta"], norm_min=doc["norm_min"], norm_max=doc["norm_max"],
            epsilon=doc.get("epsilon", QualityParams.epsilon),
        )
        reports = [
            QualityReport(sequence_id=e["id"], C=e["C"], D=e["D"], V_raw=e["V_raw"], V=e["V"], Q=e["Q"])
            for e in doc["reports"]
        ]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed quality report ({exc!r})") from None
    return reports, params
