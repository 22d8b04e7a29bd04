import csv
import json
import os
import pathlib
import subprocess

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
CONFIGS = ROOT / "configs"
CLI = os.environ.get("TOPOPT_CLI")

topopt = pytest.importorskip("topopt")

SMALL_CANTILEVER = """
[scenario]
kind = compliance-opt

[domain]
dim = 2
upper = 2 1
subdivisions = 20 10

[tags]
fixed = xmin
load = xmax y=0.4:0.6

[compliance]
young = 1
fixed = fixed
traction = load 0 -1
"""


def test_config_round_trip():
    for path in sorted(CONFIGS.glob("*.ini")):
        c = topopt.load_config(str(path))
        assert topopt.parse_config(c.serialize()) == c


def test_bad_value_raises_with_field_name():
    with pytest.raises(topopt.ConfigurationError, match="epsilon_p must be positive"):
        topopt.parse_config(SMALL_CANTILEVER + "\n[cavity]\nepsilon_p = -1\n")


def test_annulus_fields():
    c = topopt.load_config(str(CONFIGS / "annulus_oracle.ini"))
    f = topopt.geometry_fields(c)
    assert len(f["enclosed"]) == 1
    labels = f["labels"]
    core = [i for i, l in enumerate(labels) if l == f["enclosed"][0]]
    assert f["chi"][core].max() < 0.5
    assert f["p"].max() > 0.9
    assert f["J_h"] > 0


def test_short_run(tmp_path):
    c = topopt.parse_config(SMALL_CANTILEVER)
    c.output_dir = str(tmp_path / "run")
    status, summary = topopt.run(c, max_iterations=3)
    assert status == topopt.EXIT_NOT_CONVERGED
    assert summary["schema"] == 1
    assert summary["iterations"] == 3
    rows = list(csv.reader(open(tmp_path / "run" / "history.csv", newline="")))
    assert rows[0][:2] == ["iter", "objective"]
    assert len(rows) == 5


def test_override():
    c = topopt.parse_config(SMALL_CANTILEVER)
    d = c.override("cavity.a_p", "1000")
    assert "a_p = 1000" in d.serialize()


needs_cli = pytest.mark.skipif(not CLI, reason="TOPOPT_CLI not set")


@needs_cli
def test_cli_oracle(tmp_path):
    r = subprocess.run([CLI, "oracle", "--config", str(CONFIGS / "annulus_oracle.ini"), "--output", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["enclosed_components"] == 1


@needs_cli
def test_cli_exit_codes(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text(SMALL_CANTILEVER)
    r = subprocess.run([CLI, "run", "--config", str(cfg), "--output", str(tmp_path / "o"), "--max-iters", "2",
                        "--quiet"])
    assert r.returncode == 2
    bad = tmp_path / "bad.ini"
    bad.write_text(SMALL_CANTILEVER + "\n[cavity]\nepsilon_p = -1\n")
    r = subprocess.run([CLI, "run", "--config", str(bad)], capture_output=True, text=True)
    assert r.returncode == 1
    assert "epsilon_p must be positive" in r.stderr
    r = subprocess.run([CLI, "run"], capture_output=True, text=True)
    assert r.returncode == 1


@needs_cli
def test_cli_sweep(tmp_path):
    env = dict(os.environ, TOPOPT_THREADS="2")
    cfg = tmp_path / "v.ini"
    text = (CONFIGS / "annulus_oracle.ini").read_text().replace("oracle-check", "fictitious-validation")
    cfg.write_text(text.replace("subdivisions = 50 50", "subdivisions = 30 30"))
    r = subprocess.run([CLI, "sweep", "--config", str(cfg), "--param", "cavity.epsilon_p", "--values",
                        "1e-5,1e-2", "--output", str(tmp_path / "s"), "--quiet"], env=env)
    assert r.returncode == 0
    rows = list(csv.DictReader(open(tmp_path / "s" / "sweep.csv", newline="")))
    assert [row["verdict"] for row in rows] == ["appropriate", "inappropriate"]
    assert not list((tmp_path / "s").rglob("*.tmp.*"))
