import csv
import io
import json
import os
import subprocess
import sys

import pytest

from pathholonomy.cli import EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, main
from pathholonomy.config import ConfigError, apply_overrides, build, config_hash, validate

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")

STOKES = {"experiment": "stokes-check", "group": {"family": "su2"}, "dim": 3,
          "connection": {"family": "random_fourier", "seed": 1},
          "square": {"kind": "warped", "seed": 2},
          "grids": [[16, 16], [32, 32], [64, 64]],
          "tolerances": {"residual": 1e-3, "ratio_low": 3.5, "ratio_high": 4.5}}


def write(tmp_path, cfg, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_schema_rejects_empty_grids():
    with pytest.raises(ConfigError):
        validate({**STOKES, "grids": []})


def test_schema_requires_seed_for_random_fields():
    with pytest.raises(ConfigError):
        validate({**STOKES, "connection": {"family": "random_fourier"}})


def test_schema_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        validate({**STOKES, "colour": "blue"})


def test_unknown_group_is_config_error():
    with pytest.raises(ConfigError):
        build({**STOKES, "group": {"family": "so", "N": 5}})


def test_overrides_and_hash():
    cfg = apply_overrides(STOKES, steps_s=40, seed=9)
    assert cfg["grids"] == [[40, 64]] and cfg["seed"] == 9
    assert STOKES["grids"][0] == [16, 16]
    assert config_hash(cfg) != config_hash(STOKES)
    assert config_hash(json.loads(json.dumps(STOKES))) == config_hash(STOKES)


def test_exit_code_for_bad_config(tmp_path, capsys):
    path = write(tmp_path, {**STOKES, "grids": []})
    assert main(["stokes-check", "--config", path]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_exit_code_for_missing_file(tmp_path):
    assert main(["stokes-check", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG


def test_exit_code_for_wrong_subcommand(tmp_path):
    assert main(["wilson", "--config", write(tmp_path, STOKES)]) == EXIT_CONFIG


def test_exit_code_for_tolerance_failure(tmp_path):
    cfg = {**STOKES, "tolerances": {**STOKES["tolerances"], "residual": 1e-12}}
    assert main(["stokes-check", "--config", write(tmp_path, cfg)]) == EXIT_TOLERANCE


def test_json_and_csv_agree(tmp_path):
    out = tmp_path / "out"
    assert main(["stokes-check", "--config", write(tmp_path, STOKES), "--out", str(out),
                 "--format", "both"]) == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    rows = list(csv.DictReader(io.StringIO((out / "report.csv").read_text())))
    assert rep["passed"] and len(rows) == len(rep["rows"]) == 3
    assert "wall_clock_s" not in rep
    for r, c in zip(rep["rows"], rows):
        assert int(c["Ns"]) == r["Ns"]
        assert float(c["residual"]) == r["residual"]
    assert rows[0]["ratio"] == "" and 3.5 < float(rows[2]["ratio"]) < 4.5


def test_timing_flag(tmp_path):
    out = tmp_path / "out"
    main(["stokes-check", "--config", write(tmp_path, STOKES), "--out", str(out), "--timing"])
    assert json.loads((out / "report.json").read_text())["wall_clock_s"] > 0


@pytest.mark.parametrize("name", ["stokes", "surface", "variation"])
def test_reports_identical_across_workers(tmp_path, name):
    cfg = os.path.join(CONFIGS, f"{name}.json")
    experiment = json.load(open(cfg))["experiment"]
    blobs = []
    for w in (1, 2, 3):
        out = tmp_path / f"w{w}"
        main([experiment, "--config", cfg, "--out", str(out), "--workers", str(w),
              "--format", "both", "--steps-s", "32", "--steps-t", "32"])
        blobs.append(((out / "report.json").read_bytes(), (out / "report.csv").read_bytes()))
    assert blobs[0] == blobs[1] == blobs[2]


def test_console_script_runs(tmp_path):
    res = subprocess.run([sys.executable, "-m", "pathholonomy.cli", "stokes-check",
                          "--config", write(tmp_path, STOKES), "--format", "csv"],
                         capture_output=True, text=True)
    assert res.returncode == EXIT_OK
    assert res.stdout.startswith("Ns,Nt,value_re")
    assert "PASS" in res.stderr


@pytest.mark.parametrize("name", sorted(f[:-5] for f in os.listdir(CONFIGS) if f.endswith(".json")))
def test_shipped_configs_validate(name):
    cfg = json.load(open(os.path.join(CONFIGS, f"{name}.json")))
    build(cfg)
