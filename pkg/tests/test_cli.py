import csv
import subprocess
import sys

import pytest

from llgsp.cli import COMMANDS, DEFAULTS, UsageError, main, parse_config


def test_every_command_has_defaults():
    assert set(COMMANDS) == set(DEFAULTS)


def test_benchmark_defaults():
    cfg = parse_config(["accuracy-time-1d"])
    assert cfg.alpha == 0.01 and cfg.T == 0.1 and cfg.n == 2000
    assert cfg.ks[0] == 2e-2 and len(cfg.ks) == 7
    assert parse_config(["accuracy-space-1d"]).k == 1e-6
    assert parse_config(["norm-3d"]).profile == "xyz3d"
    assert cfg.explicit == set()


def test_flags_override_config_file(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("alpha = 0.5\nT = 0.2\n")
    cfg = parse_config(["accuracy-time-1d", "--config", str(conf)])
    assert cfg.alpha == 0.5 and cfg.T == 0.2
    cfg = parse_config(["accuracy-time-1d", "--config", str(conf), "--alpha", "0.3"])
    assert cfg.alpha == 0.3 and cfg.T == 0.2


def test_unknown_config_key_is_usage_error(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("gamma = 1\n")
    with pytest.raises(UsageError):
        parse_config(["norm-1d", "--config", str(conf)])
    assert main(["norm-1d", "--config", str(conf)]) == 2


@pytest.mark.parametrize("argv", [
    ["accuracy-time-1d", "--alpha=-1"],
    ["accuracy-time-1d", "--ks", "0.01"],
    ["accuracy-3d", "--method", "direct"],
    ["accuracy-time-1d", "--method", "cg"],
    ["norm-1d", "--profile", "xyz3d"],
    ["evolve", "--scheme", "nope"],
    ["no-such-command"],
    ["evolve", "--config", "/nonexistent/file.cfg"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 7


def test_norm_1d_writes_table(tmp_path, capsys):
    code = main(["norm-1d", "--ks", "0.02,0.01", "--n", "100", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.reader((tmp_path / "table4_norm_1d.csv").open()))
    assert rows[0] == ["k", "h", "max_unit_deviation"]
    assert all(float(r[2]) <= 1e-13 for r in rows[1:])


def test_accuracy_writes_order_row(tmp_path, capsys):
    code = main(["accuracy-time-1d", "--ks", "0.02,0.01", "--n", "100", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.reader((tmp_path / "table1_temporal_1d.csv").open()))
    assert rows[-1][0] == "order" and len(rows) == 4


def test_evolve_and_compare(tmp_path, capsys):
    assert main(["evolve", "--profile", "traveling3d", "--n", "8", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "field_traveling3d_initial.csv").exists()
    assert (tmp_path / "field_traveling3d_proposed.csv").exists()
    assert main(["compare", "--n", "200", "--out", str(tmp_path)]) == 0
    summary = list(csv.reader((tmp_path / "compare_cos1d_summary.csv").open()))
    diff, dev_p, dev_b = map(float, summary[1])
    assert diff <= 5e-3 and dev_p <= 1e-13 and dev_b <= 1e-15


def test_evolve_uses_explicit_k(tmp_path, capsys):
    assert main(["evolve", "--n", "20", "--k", "0.025", "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.startswith("4 steps")


def test_numerical_failure_exits_1(tmp_path, monkeypatch, capsys):
    from llgsp import cli
    from llgsp.errors import BlowupError

    def explode(*args, **kwargs):
        raise BlowupError("magnetization component reached 1e7", step=3, time=0.03)

    monkeypatch.setattr(cli.harness, "run_temporal_study_1d", explode)
    assert main(["accuracy-time-1d", "--out", str(tmp_path)]) == 1
    assert "step 3" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "llgsp", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "accuracy-time-1d" in proc.stdout
