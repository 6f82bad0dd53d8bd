import csv
import json
import subprocess
import sys

import pytest

from gramfree.cli import main


def read_csv(path):
    with open(path) as fh:
        first = fh.readline()
        assert first.startswith("# gramfree ") and "master_seed=" in first
        return list(csv.DictReader(fh))


def write_config(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_freeness_default(tmp_path):
    assert main(["freeness", "--out", str(tmp_path), "--trials", "50"]) == 0
    rows = read_csv(tmp_path / "freeness.csv")
    assert len(rows) == 11
    assert list(rows[0]) == ["k", "freeness_rate", "mean_log_det", "stderr"]
    report = json.loads((tmp_path / "report.json").read_text())
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert report["config"]["master_seed"] == manifest["master_seed"] == 0
    assert manifest["config"] == report["config"]
    assert manifest["command"] == "freeness" and "wall_clock_s" in manifest


def test_freeness_bad_trials(tmp_path, capsys):
    assert main(["freeness", "--out", str(tmp_path), "--trials", "0"]) == 2
    assert "trials" in capsys.readouterr().err


def test_freeness_degenerate(tmp_path):
    cfg = write_config(tmp_path, """
d = 20
k_max = 6
trials = 100
[sampler]
kind = "degenerate"
m = 3
""")
    assert main(["freeness", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rates = [float(r["freeness_rate"]) for r in read_csv(tmp_path / "o" / "freeness.csv")]
    assert rates == [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]


def test_freeness_gate_detects_mismatched_prediction(tmp_path):
    cfg = write_config(tmp_path, """
d = 10
k_max = 4
trials = 50
[sampler]
kind = "mixture"
weights = [0.5, 0.5]
[[sampler.parts]]
kind = "degenerate"
m = 2
[[sampler.parts]]
kind = "gaussian"
decay = 0.5
""")
    assert main(["freeness", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_bound_default_and_empty_grid(tmp_path):
    assert main(["bound", "--out", str(tmp_path), "--trials", "100", "--kmax", "3"]) == 0
    rows = read_csv(tmp_path / "bound.csv")
    assert len(rows) == 4 * 5 * 3
    assert list(rows[0]) == ["k", "t", "eps", "lhs_hat", "rhs_hat", "stderr_rhs", "satisfied"]
    assert all(r["satisfied"] == "true" for r in rows)
    cfg = write_config(tmp_path, "t_grid = []\n")
    assert main(["bound", "--config", cfg, "--out", str(tmp_path / "x")]) == 2


def test_bound_single_trial(tmp_path):
    code = main(["bound", "--out", str(tmp_path), "--trials", "1", "--kmax", "2"])
    rows = read_csv(tmp_path / "bound.csv")
    assert all(r["stderr_rhs"] != "" for r in rows)
    assert code == (0 if all(r["satisfied"] == "true" for r in rows) else 1)


def test_zeroset(tmp_path):
    assert main(["zeroset", "--out", str(tmp_path), "--trials", "100", "--d", "10",
                 "--kmax", "10"]) == 0
    rows = read_csv(tmp_path / "zeroset.csv")
    assert [float(r["zeroset_measure"]) for r in rows] == [0.0] * 10 + [1.0]


def test_zeroset_rejects_non_base(tmp_path):
    cfg = write_config(tmp_path, '[sampler]\nkind = "degenerate"\nm = 2\n')
    assert main(["zeroset", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_negligibility(tmp_path):
    cfg = write_config(tmp_path, """
d = 8
trials = 500
[negligibility]
k = [1, 2]
subspace = [[1, 1, 0, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0, 0, 1]]
shift = [0, 0, 0, 0, 0, 3, 0, 0]
""")
    assert main(["negligibility", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "negligibility.csv")
    assert [r["contrast_hits"] for r in rows] == ["500", "500"]
    assert [r["continuous_hits"] for r in rows] == ["0", "0"]


def test_selftest(tmp_path):
    assert main(["selftest", "--out", str(tmp_path), "--trials", "50", "--seed", "4"]) == 0
    first = (tmp_path / "selftest.csv").read_bytes()
    assert main(["selftest", "--out", str(tmp_path), "--trials", "50", "--seed", "4"]) == 0
    assert (tmp_path / "selftest.csv").read_bytes() == first
    assert len(read_csv(tmp_path / "selftest.csv")) == 50


def test_outputs_identical_across_workers(tmp_path):
    args = ["bound", "--trials", "60", "--kmax", "3", "--d", "16", "--seed", "12345"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "3"]) == 0
    for name in ("bound.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["freeness", "--out", str(blocker / "sub"), "--trials", "5"]) == 3


def test_bad_config_file(tmp_path):
    assert main(["freeness", "--config", str(tmp_path / "missing.toml")]) == 2
    cfg = write_config(tmp_path, "d = = 3\n")
    assert main(["freeness", "--config", cfg]) == 2
    cfg = write_config(tmp_path, "unknown_key = 1\n", "u.toml")
    assert main(["freeness", "--config", cfg]) == 2
    cfg = write_config(tmp_path, '[sampler]\nkind = "student_t"\n', "r.toml")
    assert main(["freeness", "--config", cfg]) == 2


def test_help_lists_defaults():
    out = subprocess.run([sys.executable, "-m", "gramfree", "freeness", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for token in ("--config", "--workers", "--kmax", "tol_dep = 1e-10", "t_grid", "decay = 0.5"):
        assert token in out


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["plot"])
    assert exc.value.code == 2


@pytest.mark.parametrize("name", ["freeness_gaussian", "freeness_degenerate", "bound",
                                  "zeroset", "negligibility", "mixture"])
def test_shipped_configs_load(name):
    from pathlib import Path
    from gramfree.config import load_config
    path = Path(__file__).resolve().parents[1] / "configs" / f"{name}.toml"
    config, extras = load_config(path)
    assert config.trials >= 1
