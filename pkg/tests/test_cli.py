import csv
import json
import os

import pytest

from pencilbeam import kernels
from pencilbeam.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

SMALL = ["--runs", "2", "--measurement-resolution", "5", "-q"]


def test_validate_defaults(capsys):
    assert main(["validate"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "ok"


def test_zero_epsilon_rejected(capsys):
    assert main(["validate", "--epsilon", "0"]) == EXIT_CONFIG
    assert "epsilon must be positive" in capsys.readouterr().err


def test_too_many_spots(capsys):
    assert main(["validate", "--n-spots-per-sector", "65"]) == EXIT_CONFIG
    assert "n_spots_per_sector exceeds radiating elements" in capsys.readouterr().err


def test_bad_sweep(capsys):
    assert main(["validate", "--sweep", "frequency=1,2"]) == EXIT_CONFIG
    assert main(["validate", "--sweep", "epsilon"]) == EXIT_CONFIG
    assert main(["validate", "--sweep", "epsilon=2,abc"]) == EXIT_CONFIG
    assert main(["validate", "--policy", "wide"]) == EXIT_CONFIG


def test_bad_value(capsys):
    assert main(["validate", "--n-gnb", "seven"]) == EXIT_CONFIG
    assert "n_gnb" in capsys.readouterr().err


def test_run_requires_out():
    assert main(["run", *SMALL]) == EXIT_CONFIG


def test_run_writes_artifacts(tmp_path):
    out = tmp_path / "res"
    assert main(["run", *SMALL, "--sweep", "epsilon=8,2", "--out", str(out)]) == EXIT_OK
    for tag in ("epsilon=8", "epsilon=2"):
        assert (out / tag / "scenario.csv").exists()
        for policy in ("pencil", "fixed", "none"):
            assert (out / tag / policy / "ecdf_emf.csv").exists()
            assert (out / tag / policy / "grid_avg.csv").exists()
            assert (out / tag / policy / "spot_emf.csv").exists()
        for policy in ("pencil", "fixed"):
            for name in ("ecdf_throughput.csv", "ue_throughput.csv", "beams.csv", "widths.csv",
                         "overlap_grid.csv"):
                assert (out / tag / policy / name).exists()
        assert not (out / tag / "none" / "beams.csv").exists()
    rows = list(csv.DictReader(open(out / "summary.csv")))
    assert len(rows) == 6
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 0
    assert manifest["sweep"] == {"parameter": "epsilon", "values": [8.0, 2.0]}
    assert manifest["scenarios"]["epsilon=2"]["config"]["n_runs"] == 2


def test_per_run_grids(tmp_path):
    out = tmp_path / "res"
    assert main(["run", *SMALL, "--policy", "pencil", "--per-run-grids", "--out", str(out)]) == EXIT_OK
    assert (out / "default" / "pencil" / "grid_run00.csv").exists()
    assert (out / "default" / "pencil" / "grid_run01.csv").exists()


def read_tree(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*.csv"))}


@pytest.mark.skipif(not kernels.compiled_available(), reason="compiled kernels not built")
def test_threads_do_not_change_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", *SMALL, "--policy", "pencil,fixed", "--threads", "1", "--out", str(a)]) == EXIT_OK
    assert main(["run", *SMALL, "--policy", "pencil,fixed", "--threads", "3", "--out", str(b)]) == EXIT_OK
    ta, tb = read_tree(a), read_tree(b)
    assert ta.keys() == tb.keys()
    assert ta == tb


def test_seed_changes_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", *SMALL, "--policy", "pencil", "--out", str(a)])
    main(["run", *SMALL, "--policy", "pencil", "--seed", "1", "--out", str(b)])
    assert read_tree(a) != read_tree(b)


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_output_dir(tmp_path, capsys):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    try:
        assert main(["run", *SMALL, "--out", str(locked / "x")]) == EXIT_RUNTIME
    finally:
        locked.chmod(0o700)


def test_output_path_is_a_file(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", *SMALL, "--out", str(blocker / "x")]) == EXIT_RUNTIME
    assert "not writable" in capsys.readouterr().err


def test_toml_config(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        "[experiment]\npolicies = ['pencil']\nsweep = {parameter = 'g_max', values = [9, 12]}\n"
        "[scenario]\nepsilon = 4.0\nn_runs = 2\nmeasurement_resolution = 5.0\n")
    out = tmp_path / "res"
    assert main(["run", "--config", str(cfg), "--out", str(out), "-q"]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir() if p.is_dir()) == ["g_max=12", "g_max=9"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["scenarios"]["g_max=9"]["config"]["epsilon"] == 4.0
    # flags override the file
    assert main(["validate", "--config", str(cfg), "--epsilon", "0"]) == EXIT_CONFIG


def test_toml_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("colour = 'red'\n")
    assert main(["validate", "--config", str(cfg)]) == EXIT_CONFIG
    assert "unknown config key 'colour'" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.toml")]) == EXIT_CONFIG
