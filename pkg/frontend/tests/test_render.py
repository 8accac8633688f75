"""Render every figure kind from real experiment output.

The experiment directories are produced by invoking the `lab` CLI (the
primary package's external interface) with reduced parameters; the
artifact schemas are identical to full runs.
"""
import hashlib
import json
import subprocess

import pytest

from labplot import FIGURE_KINDS, FigureSpec, render, render_to_file
from labplot.cli import main as labplot_main


def run_lab(exp, out, *overrides):
    cmd = ["lab", "run", exp, "--out", str(out)]
    for kv in overrides:
        cmd += ["--set", kv]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    return out


@pytest.fixture(scope="session")
def golden(tmp_path_factory):
    base = tmp_path_factory.mktemp("golden")
    dirs = {
        "E1": run_lab("E1", base / "e1", "periods=0.4"),
        "E2": run_lab("E2", base / "e2", "trials=8"),
        "E4": run_lab("E4", base / "e4", "n_paths=30000", "n_steps=500",
                      "record_every=250", "csv_paths=300"),
        "E7": run_lab("E7", base / "e7"),
    }
    return dirs


KIND_TO_DIR = {
    "min-density-series": "E1",
    "zero-displacement-scatter": "E2",
    "density-histogram-overlay": "E4",
    "section-heatmap-with-charges": "E7",
}


def dir_digest(path):
    out = {}
    for p in sorted(path.rglob("*")):
        if p.is_file():
            out[str(p)] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_every_kind_renders(kind, golden, tmp_path):
    exp_dir = golden[KIND_TO_DIR[kind]]
    before = dir_digest(exp_dir)
    out, info = render_to_file(FigureSpec(exp_dir, kind), tmp_path / f"{kind}.svg")
    assert out.exists() and out.stat().st_size > 1000
    assert out.read_text(errors="ignore").lstrip().startswith("<?xml")
    assert dir_digest(exp_dir) == before  # rendering never writes into the input


def test_e7_marker_matches_reported_position(golden):
    exp_dir = golden["E7"]
    results = json.loads((exp_dir / "results.json").read_text())
    fig, info = render(FigureSpec(exp_dir, "section-heatmap-with-charges"))
    assert info["reported_zero"] == (results["metrics"]["zero_x"], results["metrics"]["zero_y"])
    # the detected-charge marker nearest the report coincides with it
    zx, zy = info["reported_zero"]
    nearest = min(info["markers"], key=lambda m: (m[0] - zx) ** 2 + (m[1] - zy) ** 2)
    assert nearest[2] == 1
    assert abs(nearest[0] - zx) < 1e-12 and abs(nearest[1] - zy) < 1e-12


def test_deterministic_output(golden, tmp_path):
    spec = FigureSpec(golden["E2"], "zero-displacement-scatter")
    a, _ = render_to_file(spec, tmp_path / "a.svg")
    b, _ = render_to_file(spec, tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()


def test_schema_mismatch_names_column(golden, tmp_path):
    broken = tmp_path / "broken"
    broken.mkdir()
    src = golden["E2"]
    (broken / "results.json").write_text((src / "results.json").read_text())
    rows = (src / "trials.csv").read_text().splitlines()
    header = rows[0].replace("displacement", "shift")
    (broken / "trials.csv").write_text("\n".join([header] + rows[1:]) + "\n")
    with pytest.raises(ValueError, match="displacement"):
        render(FigureSpec(broken, "zero-displacement-scatter"))


def test_unknown_kind_rejected(golden):
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureSpec(golden["E1"], "pie-chart")


def test_cli_renders_png(golden, tmp_path):
    out = tmp_path / "fig.png"
    code = labplot_main([str(golden["E1"]), "--kind", "min-density-series", "--out", str(out)])
    assert code == 0
    assert out.stat().st_size > 1000


def test_cli_missing_results_errors(tmp_path):
    code = labplot_main([str(tmp_path), "--kind", "min-density-series",
                         "--out", str(tmp_path / "x.svg")])
    assert code == 1
