import os
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from trackcurate.errors import DataError
from trackcurate.metrics import challenge_curve
from trackcurate.plots import (
    challenge_csv,
    ranking_csv,
    score_table_csv,
    write_challenge_plot,
    write_ranking_plot,
)

SVG = "{http://www.w3.org/2000/svg}"


def texts(svg_path):
    root = ET.parse(svg_path).getroot()
    return [t.text for t in root.iter(f"{SVG}text")]


def test_flat_zero_curve(tmp_path):
    curve = challenge_curve([0.0, 0.0, 0.0], 0.1, label="easy")
    csv_path, svg_path = write_challenge_plot([curve], tmp_path)
    labels = texts(svg_path)
    assert "easy (AUC 0.000)" in labels
    assert "mIoU error threshold" in labels
    assert "ratio of challenge sequences" in labels
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "series,threshold,fraction"
    assert all(r.endswith(",0.0") for r in rows[1:])
    assert len(rows) == 12


def test_two_tracker_bars(tmp_path):
    csv_path, svg_path = write_ranking_plot({"mIoU": {"B": 0.4, "A": 0.6}}, tmp_path)
    assert csv_path.read_text().splitlines() == ["tracker,mIoU", "A,0.6", "B,0.4"]
    labels = texts(svg_path)
    assert "A" in labels and "B" in labels and "mIoU" in labels


def test_seven_series(tmp_path):
    rng = np.random.default_rng(0)
    curves = [challenge_curve(rng.random(20), 0.01, label=f"set{k}") for k in range(7)]
    _, svg_path = write_challenge_plot(curves, tmp_path, name="fig")
    legend = [t for t in texts(svg_path) if re.fullmatch(r"set\d \(AUC \d\.\d{3}\)", t)]
    assert len(legend) == 7
    assert challenge_csv(curves).count("\nset3,") == 101


def test_ranking_csv_follows_first_series():
    out = ranking_csv({"overall": {"x": 0.2, "y": 0.5}, "selected": {"x": 0.9, "y": 0.1}})
    assert out.splitlines() == ["tracker,overall,selected", "y,0.5,0.1", "x,0.2,0.9"]


def test_score_table_rounding():
    out = score_table_csv({"d": {"a": 0.6213, "b": 0.4049}}, ["a", "b"], {"d": (0.5131, 20.004)})
    assert out.splitlines()[1] == "d,62.1,40.5,51.3,20.00"


def test_svg_output_is_deterministic(tmp_path):
    curve = challenge_curve([0.1, 0.7], 0.05, label="<&>")
    a = write_challenge_plot([curve], tmp_path / "a")[1].read_bytes()
    b = write_challenge_plot([curve], tmp_path / "b")[1].read_bytes()
    assert a == b
    assert "<&> (AUC" in " ".join(texts(tmp_path / "a" / "challenge.svg"))


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_directory_permissions(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir(mode=0o500)
    with pytest.raises(DataError, match="locked"):
        write_challenge_plot([challenge_curve([0.5], 0.1)], locked / "sub")


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(DataError, match="cannot create output directory"):
        write_challenge_plot([challenge_curve([0.5], 0.1)], blocker / "sub")
    with pytest.raises(DataError):
        write_ranking_plot({"m": {"a": 0.5}}, blocker)


def test_empty_inputs():
    with pytest.raises(DataError):
        write_challenge_plot([], "unused")
    with pytest.raises(DataError):
        write_ranking_plot({}, "unused")
