import csv
import json
import math

import numpy as np
import pytest

from wermerdomain import report
from wermerdomain.cli import main
from wermerdomain.config import RunConfig, build_config, load_file, parse_box, parse_schedule
from wermerdomain.errors import ConfigError
from wermerdomain.lattice import CustomSchedule, ExponentialSchedule


def run_cli(tmp_path, *args):
    return main(list(args) + ["--outdir", str(tmp_path)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_print_config_roundtrip(tmp_path, capsys):
    assert main(["slice", "--print-config", "--n", "5", "--seed", "3"]) == 0
    text = capsys.readouterr().out
    cfg_file = tmp_path / "run.ini"
    cfg_file.write_text(text)
    cfg = build_config(load_file(str(cfg_file)))
    assert cfg == build_config(overrides={"n": 5, "seed": 3})
    assert cfg.hash() == RunConfig(n=5, seed=3).hash()


def test_flags_override_file(tmp_path, capsys):
    f = tmp_path / "flat.cfg"
    f.write_text("n = 4\nseed = 9\n")
    assert main(["slice", "--config", str(f), "--n", "6", "--print-config"]) == 0
    out = capsys.readouterr().out
    assert "n = 6" in out and "seed = 9" in out


@pytest.mark.parametrize("args, field", [
    (["--level", "40"], "level"),
    (["--schedule", "custom:1,2"], "schedule"),
    (["--box", "-2,-2"], "box"),
    (["--n", "2.5"], "n"),
    (["--radii", "0.1,0.2"], "radii"),
    (["--loop-radius", "0.7"], "loop_radius"),
    (["--rho", "table:0,1;0,-1"], "rho"),
    (["--z0", "two"], "z0"),
])
def test_config_errors_exit_2(tmp_path, capsys, args, field):
    assert run_cli(tmp_path, "slice", *args) == 2
    assert f"config error: {field}:" in capsys.readouterr().err


def test_unknown_flag_and_missing_file(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["slice", "--bogus", "1"])
    assert exc.value.code == 2
    assert main(["slice", "--config", str(tmp_path / "nope.ini")]) == 2


def test_parsers():
    assert parse_schedule("exp:1:2") == ExponentialSchedule(1.0, 2.0)
    assert parse_schedule("custom:0.5,0.0625") == CustomSchedule([0.5, 0.0625])
    assert parse_box("-2,2") == [(-2.0, 2.0)] * 4
    with pytest.raises(ConfigError):
        parse_box("1,2,3")


def test_slice_command(tmp_path):
    assert run_cli(tmp_path, "slice", "--z0", "2+0i", "--n", "8") == 0
    rows = read_csv(tmp_path / "slice.csv")
    assert len(rows) == 257
    assert rows[0][-2:] == ["seed", "config_hash"]
    doc = json.loads((tmp_path / "slice.json").read_text())
    assert {"command", "config_hash", "seed", "results", "invariants", "header"} <= set(doc)
    assert "timing_ms" in doc["header"]
    inv = {i["name"]: i["pass"] for i in doc["invariants"]}
    assert inv["negation_symmetric"]
    assert all(r[-1] == doc["config_hash"] for r in rows[1:])
    assert (tmp_path / "slice.csv").read_bytes().count(b"\r\n") == 257


def test_walk_command(tmp_path):
    assert run_cli(tmp_path, "walk", "--n", "6", "--seed", "7") == 0
    doc = json.loads((tmp_path / "walk.json").read_text())
    assert doc["results"]["error"] < 2 ** -5
    assert doc["seed"] == 7


def test_volume_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["volume", "--region", "A", "--box", "-2,2", "--N", "1e6", "--seed", "1"]
    assert main(args + ["--outdir", str(a)]) == 0
    assert main(args + ["--outdir", str(b)]) == 0
    assert (a / "volume.csv").read_bytes() == (b / "volume.csv").read_bytes()
    ja, jb = json.loads((a / "volume.json").read_text()), json.loads((b / "volume.json").read_text())
    ja.pop("header"), jb.pop("header")
    assert ja == jb


def test_phi_map_heatmap(tmp_path):
    assert run_cli(tmp_path, "phi-map", "--pixels", "32", "--half-width", "1.5") == 0
    img = report.read_pgm(str(tmp_path / "phi_map.pgm"))
    scale = json.loads((tmp_path / "phi_map.pgm.json").read_text())
    assert img.shape == (32, 32) and img.max() == 65535 and img.min() == 0
    assert scale["width"] == 32 and scale["vmin"] < scale["vmax"]


def test_invariant_failure_exits_1(tmp_path, capsys):
    # phi_tilde is undefined around the chosen regular point, so its Lelong check fails
    assert run_cli(tmp_path, "lelong") == 1
    out = capsys.readouterr().out
    assert "[PASS] phi_n_ratio" in out and "[FAIL] phi_tilde_ratio" in out


def test_selftest_flag(tmp_path):
    assert run_cli(tmp_path, "spiral", "--selftest") == 0
    doc = json.loads((tmp_path / "spiral-selftest.json").read_text())
    assert doc["results"]["modules"] == ["lattice"]


def test_pgm_roundtrip(tmp_path):
    v = np.array([[0.0, 1.0, np.nan], [2.0, -np.inf, 4.0]])
    scale = report.write_pgm(str(tmp_path / "x.pgm"), v)
    back = report.read_pgm(str(tmp_path / "x.pgm"))
    assert back.tolist() == [[0, 16384, 0], [32768, 0, 65535]]
    assert scale["nonfinite_count"] == 2


def test_csv_floats_round_trip(tmp_path):
    vals = [0.1, 1 / 3, 2.0 ** -60, math.pi * 1e300]
    report.write_csv(str(tmp_path / "t.csv"), ["x"], [[v] for v in vals], 0, "abc")
    rows = read_csv(tmp_path / "t.csv")[1:]
    assert [float(r[0]) for r in rows] == vals
