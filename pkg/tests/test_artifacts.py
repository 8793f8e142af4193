from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from metriclag.artifacts import emit_plot, read_csv, render_svg, write_csv
from metriclag.errors import ValidationError

GOLDEN = Path(__file__).parent / "data" / "golden_plot.svg"


def _series():
    t = np.linspace(0, 2 * np.pi, 25)
    return [("sin", t, np.sin(t)), ("cos <x>", t, np.cos(t))]


def test_svg_matches_golden_file(tmp_path):
    out = emit_plot(_series(), tmp_path / "p.svg", "golden & plot", "t", "y")
    assert out.read_bytes() == GOLDEN.read_bytes()


def test_svg_escapes_and_is_deterministic():
    a = render_svg(_series(), "golden & plot")
    assert "&amp;" in a and "&lt;x&gt;" in a
    assert a == render_svg(_series(), "golden & plot")


@pytest.mark.parametrize("series", [[], [("a", [1, 2], [1])], [("a", [], [])]])
def test_svg_rejects_bad_series(series):
    with pytest.raises(ValidationError):
        render_svg(series)


def test_csv_round_trip_is_exact(tmp_path):
    vals = np.random.default_rng(0).normal(size=(5, 3))
    path = write_csv(tmp_path / "sub" / "a.csv", [("a", "b", "c")] + [tuple(r) for r in vals])
    header, data = read_csv(path)
    assert header == ["a", "b", "c"]
    assert np.array_equal(data, vals)
    assert path.read_bytes().count(b"\r\n") == 6


def test_two_point_line_has_two_points():
    svg = render_svg([("a", [0.0, 1.0], [0.0, 1.0])])
    (pts,) = [ln for ln in svg.splitlines() if ln.startswith("<polyline")]
    assert pts.split('points="')[1].rstrip('"/>').count(",") == 2


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_plot(_series(), blocker / "p.svg")
