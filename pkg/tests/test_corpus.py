import json
import random

import numpy as np
import pytest

from trackcurate.corpus import (
    Corpus,
    ResultSet,
    Scenario,
    load_corpus,
    load_manifest,
    load_quality_report,
    load_results,
    parse_boxes,
    save_manifest,
    save_quality_report,
    save_results,
)
from trackcurate.errors import DataError, FormatError
from trackcurate.quality import QualityParams, QualityReport, score_corpus
from trackcurate.synth import write_tree


def _write_manifest(tmp_path, entries):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"format_version": 1, "sequences": entries}))
    return path


def _entry(sid, scenario="animal", sub="cat", frames=2):
    return {"id": sid, "scenario": scenario, "sub_scenario": sub, "source_dataset": "d",
            "gt_path": f"gt/{sid}.txt", "frame_count": frames}


@pytest.fixture
def two_seq_manifest(tmp_path):
    (tmp_path / "gt").mkdir()
    (tmp_path / "gt" / "a.txt").write_text("10,20,30,40\n1,2,3,4\n")
    (tmp_path / "gt" / "b.txt").write_text("0\t0\t5\t5\n\n")
    return _write_manifest(tmp_path, [_entry("b", "UAV"), _entry("a")])


class TestScenario:
    def test_case_insensitive(self):
        assert Scenario.parse("Human-Body") is Scenario.HUMAN_BODY
        assert Scenario.parse("sport_ball") is Scenario.SPORT_BALL

    def test_unknown_lists_valid_names(self):
        with pytest.raises(DataError) as err:
            Scenario.parse("robot")
        for s in Scenario:
            assert s.value in str(err.value)


class TestParseBoxes:
    def test_comma_line(self):
        np.testing.assert_array_equal(parse_boxes("10,20,30,40"), [[10, 20, 30, 40]])

    def test_separators_and_absence(self):
        arr = parse_boxes("1 2 3 4\n5\t6\t7\t8\nNaN,NaN,NaN,NaN\n\n1.5, 2.5, 3, 4\n")
        assert arr.shape == (5, 4)
        np.testing.assert_array_equal(arr[0], [1, 2, 3, 4])
        np.testing.assert_array_equal(arr[1], [5, 6, 7, 8])
        assert np.isnan(arr[2]).all() and np.isnan(arr[3]).all()
        np.testing.assert_array_equal(arr[4], [1.5, 2.5, 3, 4])

    def test_malformed_line_reports_location(self):
        with pytest.raises(FormatError, match=r"f\.txt:2: .*'1,2,3'"):
            parse_boxes("1,2,3,4\n1,2,3\n", "f.txt")

    def test_non_numeric(self):
        with pytest.raises(FormatError, match=":1:"):
            parse_boxes("a,b,c,d\n", "f.txt")


class TestManifest:
    def test_happy_path(self, two_seq_manifest):
        corpus = load_manifest(two_seq_manifest)
        assert corpus.ids == ["a", "b"]
        a = corpus.sequence("a")
        assert a.frame_count == 2
        assert a.gt[0].as_tuple() == (10, 20, 30, 40)
        assert corpus.sequence("b").scenario is Scenario.UAV
        assert corpus.sequence("b").gt[1] is None

    def test_unknown_scenario(self, tmp_path):
        path = _write_manifest(tmp_path, [_entry("a", "robot")])
        with pytest.raises(DataError, match="human-body.*cartoon"):
            load_manifest(path)

    def test_duplicate_id(self, tmp_path):
        (tmp_path / "gt").mkdir()
        (tmp_path / "gt" / "a.txt").write_text("1,1,1,1\n1,1,1,1\n")
        path = _write_manifest(tmp_path, [_entry("a"), _entry("a")])
        with pytest.raises(DataError, match="duplicate"):
            load_manifest(path)

    def test_frame_count_mismatch(self, tmp_path):
        (tmp_path / "gt").mkdir()
        (tmp_path / "gt" / "a.txt").write_text("1,1,1,1\n")
        with pytest.raises(DataError, match="1 frames, manifest says 2"):
            load_manifest(_write_manifest(tmp_path, [_entry("a")]))

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"sequences": [\n  {"id": "a",,}\n]}')
        with pytest.raises(FormatError, match=r"m\.json:2:"):
            load_manifest(path)

    def test_missing_field(self, tmp_path):
        e = _entry("a")
        del e["sub_scenario"]
        with pytest.raises(FormatError, match="sub_scenario"):
            load_manifest(_write_manifest(tmp_path, [e]))

    def test_order_independent(self, tmp_path, small_corpus):
        save_manifest(small_corpus, tmp_path / "m1.json")
        doc = json.loads((tmp_path / "m1.json").read_text())
        random.Random(0).shuffle(doc["sequences"])
        (tmp_path / "m2.json").write_text(json.dumps(doc))
        assert load_manifest(tmp_path / "m1.json") == load_manifest(tmp_path / "m2.json")

    def test_round_trip(self, tmp_path, small_corpus):
        save_manifest(small_corpus, tmp_path / "manifest.json")
        assert load_manifest(tmp_path / "manifest.json") == Corpus(small_corpus.sequences)


class TestResults:
    def test_round_trip(self, tmp_path, small_corpus):
        manifest = write_tree(small_corpus, tmp_path)
        loaded = load_corpus(manifest, tmp_path / "results", passes=2)
        assert loaded == small_corpus
        for rs in loaded.result_sets:
            for sid, traj in rs.trajectories.items():
                assert len(traj) == loaded.sequence(sid).frame_count

    def test_length_mismatch(self, tmp_path, small_corpus):
        write_tree(small_corpus, tmp_path)
        sid = small_corpus.ids[0]
        f = tmp_path / "results" / "trk01" / "pass2" / f"{sid}.txt"
        f.write_text("\n".join(f.read_text().splitlines()[:-1]) + "\n")
        n = small_corpus.sequence(sid).frame_count
        with pytest.raises(DataError, match=f"expected {n} frames, got {n - 1}"):
            load_results(tmp_path / "results", Corpus(small_corpus.sequences))

    def test_missing_file_names_everything(self, tmp_path, small_corpus):
        write_tree(small_corpus, tmp_path)
        sid = small_corpus.ids[1]
        (tmp_path / "results" / "trk02" / "pass1" / f"{sid}.txt").unlink()
        with pytest.raises(DataError, match=f"'trk02' pass 1: missing result file for sequence '{sid}'"):
            load_results(tmp_path / "results", Corpus(small_corpus.sequences))

    def test_missing_pass(self, tmp_path, small_corpus):
        write_tree(small_corpus, tmp_path)
        with pytest.raises(DataError, match="pass3"):
            load_results(tmp_path / "results", Corpus(small_corpus.sequences), passes=3)

    def test_nan_line_is_absent_frame(self, tmp_path, small_corpus):
        write_tree(small_corpus, tmp_path)
        sid = small_corpus.ids[0]
        f = tmp_path / "results" / "trk00" / "pass1" / f"{sid}.txt"
        lines = f.read_text().splitlines()
        lines[3] = "NaN,NaN,NaN,NaN"
        f.write_text("\n".join(lines) + "\n")
        rsets = load_results(tmp_path / "results", Corpus(small_corpus.sequences))
        traj = next(r for r in rsets if r.tracker == "trk00" and r.pass_index == 1).trajectories[sid]
        assert traj[3] is None

    def test_accepts_exact_length(self, tmp_path):
        seq = Corpus(load_manifest_fixture(tmp_path).sequences)
        save_results([ResultSet("t", 1, {"a": seq.sequence("a").gt})], tmp_path / "r")
        assert load_results(tmp_path / "r", seq)[0].trajectories["a"] == seq.sequence("a").gt


def load_manifest_fixture(tmp_path):
    (tmp_path / "gt").mkdir()
    (tmp_path / "gt" / "a.txt").write_text("0,0,1,1\n0,0,2,2\n")
    return load_manifest(_write_manifest(tmp_path, [_entry("a")]))


class TestQualityReportFile:
    def test_round_trip(self, tmp_path, small_corpus):
        reports = score_corpus(small_corpus)
        params = QualityParams(eta=3.0, norm_min=0.2, norm_max=0.9)
        save_quality_report(reports, tmp_path / "q.json", params)
        assert load_quality_report(tmp_path / "q.json") == (reports, params)

    def test_awkward_floats_survive(self, tmp_path):
        r = [QualityReport("x", 0.1 + 0.2, 1 / 3, -13.815510557964274, 2 ** -1074, 1e308)]
        save_quality_report(r, tmp_path / "q.json")
        assert load_quality_report(tmp_path / "q.json")[0] == r

    def test_empty(self, tmp_path):
        save_quality_report([], tmp_path / "q.json")
        assert load_quality_report(tmp_path / "q.json") == ([], QualityParams())

    def test_version_mismatch(self, tmp_path):
        save_quality_report([], tmp_path / "q.json")
        doc = json.loads((tmp_path / "q.json").read_text())
        doc["format_version"] = 99
        (tmp_path / "q.json").write_text(json.dumps(doc))
        with pytest.raises(FormatError, match="format_version"):
            load_quality_report(tmp_path / "q.json")

    def test_trailing_garbage_reports_offset(self, tmp_path, small_corpus):
        path = tmp_path / "q.json"
        save_quality_report(score_corpus(small_corpus), path)
        good = path.read_bytes()
        path.write_bytes(good + b"\x00garbage")
        with pytest.raises(FormatError, match=f"byte offset {len(good)}"):
            load_quality_report(path)
