import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from bqca import experiment
from bqca.cli import main
from bqca.experiment import (ConfigError, FIGURES, emit_diagram, load_config, read_diagram_csv,
                             resolve_preset, run)
from bqca.metrics import SpaceTimeDiagram

BAD = sorted((Path(__file__).parent / "fixtures" / "bad_configs").glob("*.yaml"))


def small_config(**kw):
    cfg = {"name": "small", "n": 6, "boundary": {"fixed": [0, 0]}, "initial": "+0000+",
           "program": {"rule": {"preset": "M1"}}, "steps": 4,
           "outputs": ["p1-diagram", "entropy-diagram", "R-series", "tangle-series", "schmidt-histogram"]}
    cfg.update(kw)
    return cfg


def test_twenty_bad_fixtures():
    assert len(BAD) == 20


@pytest.mark.parametrize("path", BAD, ids=lambda p: p.stem)
def test_bad_config_rejected_with_path(path, tmp_path):
    expected = path.read_text().splitlines()[0].split("path:")[1].strip()
    with pytest.raises(ConfigError) as info:
        run(path, tmp_path)
    assert info.value.path == expected
    assert not any(tmp_path.iterdir()), "no partial output"


def test_cli_reports_structured_error(tmp_path, capsys):
    assert main([str(BAD[0]), "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "config" and err["path"] == "n"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        run(tmp_path / "nope.yaml", tmp_path)


def test_figure_configs_validate():
    for name in FIGURES:
        cfg = load_config(yaml.safe_load(experiment.figure_config_text(name)))
        experiment.build_runs(cfg)


def test_presets_resolve():
    for name in ("M1", "M2", "cluster-rule", "transport", "swap", "bell", "ghz", "cluster",
                 "rule110", "rule108", "mixed(0.25)"):
        assert resolve_preset(name) is not None
    with pytest.raises(KeyError):
        resolve_preset("rule30")


def test_run_is_deterministic(tmp_path):
    cfg = small_config()
    a = run(cfg, tmp_path / "a", emit_schedule=True)
    b = run(cfg, tmp_path / "b", emit_schedule=True)
    names = sorted(p.name for p in a)
    assert names == sorted(p.name for p in b)
    for p in a:
        if p.name == "manifest.json":
            continue
        assert p.read_bytes() == (tmp_path / "b" / "small" / p.name).read_bytes()
    man = json.loads((tmp_path / "a" / "small" / "manifest.json").read_text())
    assert man["config_sha256"] == experiment.config_hash(cfg)
    assert "numpy" in man["versions"] and man["wall_time_s"] >= 0


def test_series_and_histogram_files(tmp_path):
    run(small_config(), tmp_path)
    d = tmp_path / "small"
    r = np.loadtxt(d / "small.R.csv", delimiter=",", skiprows=1)
    assert r.shape == (5, 2) and abs(r[0, 1]) < 1e-12
    hist = np.loadtxt(d / "small.schmidt.csv", delimiter=",", skiprows=1)
    assert np.all(hist[:, 1:].sum(axis=1) == 31)


def test_csv_roundtrip(tmp_path, rng):
    d = SpaceTimeDiagram(rng.uniform(size=(7, 6)), rng.uniform(size=(7, 6)))
    p = emit_diagram(d, "csv", tmp_path / "d.csv")
    assert p.read_text().splitlines()[0] == "0,1,2,3,4,5"
    assert np.max(np.abs(read_diagram_csv(p) - d.p1)) < 1e-12


def test_pgm_conventions(tmp_path):
    d = SpaceTimeDiagram(np.zeros((3, 4)), np.array([[1.0, 0.5, 0.0, 1.0]] * 3))
    lines = emit_diagram(d, "pgm", tmp_path / "z.pgm").read_text().split("\n")
    assert lines[:3] == ["P2", "4 3", "255"]
    assert lines[3] == "255 255 255 255"
    lines = emit_diagram(d, "pgm", tmp_path / "e.pgm", which="entropy").read_text().split("\n")
    assert lines[3] == "0 127 255 0" or lines[3] == "0 128 255 0"
    with pytest.raises(ValueError):
        emit_diagram(d, "png", tmp_path / "x.png")


def test_unwritable_destination(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        run(small_config(), blocker)


def test_fig1_final_row(tmp_path):
    run(yaml.safe_load(experiment.figure_config_text("fig1")), tmp_path)
    p1 = read_diagram_csv(tmp_path / "fig1" / "fig1.p1.csv")
    assert p1.shape == (9, 14)
    assert np.allclose(p1[-1, :-1], 0, atol=1e-12)
    assert abs(p1[-1, -1] - 0.64) < 1e-12


def test_fig6_series(tmp_path):
    cfg = yaml.safe_load(experiment.figure_config_text("fig6"))
    cfg["outputs"] = ["R-series"]
    run(cfg, tmp_path)
    m1 = np.loadtxt(tmp_path / "fig6" / "M1.R.csv", delimiter=",", skiprows=1)[:, 1]
    m2 = np.loadtxt(tmp_path / "fig6" / "M2.R.csv", delimiter=",", skiprows=1)[:, 1]
    assert m1.max() <= 0.62
    assert 0.85 <= m2[50:151].mean() <= 0.95


def test_fig8_ordering(tmp_path):
    cfg = yaml.safe_load(experiment.figure_config_text("fig8"))
    cfg["outputs"] = ["tangle-series", "mixedness-series"]
    run(cfg, tmp_path)
    tau = {lab: np.loadtxt(tmp_path / "fig8" / f"{lab}.tangle.csv", delimiter=",", skiprows=1)[1:13, 1]
           for lab in ("p0", "p0.5", "p1")}
    assert tau["p1"].mean() > tau["p0.5"].mean() > tau["p0"].mean()


def test_seed_figures_and_jobs(tmp_path):
    assert main(["--seed-figures", "--out", str(tmp_path / "cfg")]) == 0
    assert sorted(p.stem for p in (tmp_path / "cfg").glob("*.yaml")) == sorted(FIGURES)
    a = tmp_path / "a.yaml"
    b = tmp_path / "b.yaml"
    a.write_text(yaml.safe_dump(small_config(name="a", outputs=["p1-diagram"])))
    b.write_text(yaml.safe_dump(small_config(name="b", outputs=["p1-diagram"])))
    assert main([str(a), str(b), "--jobs", "2", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "a" / "a.p1.csv").exists()
    assert (tmp_path / "o" / "b" / "b.p1.pgm").exists()


def test_emit_schedule_flag(tmp_path):
    cfg = tmp_path / "t.yaml"
    cfg.write_text(yaml.safe_dump({"name": "t", "n": 6, "boundary": {"fixed": [0, 0]},
                                   "program": {"sequence": {"preset": "transport"}},
                                   "initial": {"seed_state": "+"}, "outputs": ["p1-diagram"]}))
    assert main([str(cfg), "--out", str(tmp_path), "--emit-schedule"]) == 0
    sched = json.loads((tmp_path / "t" / "t.schedule.json").read_text())
    assert abs(sched["total_time"] - 6 * np.pi / 4) < 1e-12


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["x.yaml", "--jobs", "0"]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "bqca", "--seed-figures", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert (tmp_path / "fig8.yaml").exists()
