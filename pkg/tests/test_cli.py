import subprocess
import sys

import pytest

from circletrack.cli import EXIT_ABORTED, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK, main
from circletrack.harness import TRACE_COLUMNS, read_trace_csv


def short(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_scenarios_lists_builtins(capsys):
    assert main(["scenarios"]) == EXIT_OK
    names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert names == ["paper-a", "paper-b1", "paper-b2", "paper-b3", "paper-inside", "paper-far"]


def test_run_writes_trace(tmp_path, capsys):
    cfg = short(tmp_path, 'base = "paper-a"\nt_end = 0.5\n')
    out = tmp_path / "trace.csv"
    assert main(["run", cfg, "--out", str(out), "--mode", "oracle"]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 1 + 51
    # 17 significant digits: values survive the text round trip
    assert len(read_trace_csv(out)) == 51
    assert "not converged" in capsys.readouterr().out


def test_run_default_output_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = short(tmp_path, 't_end = 0.05\nestimator_mode = "oracle"\n', "tiny.toml")
    assert main(["run", cfg]) == EXIT_OK
    assert (tmp_path / "tiny.csv").exists()


def test_require_convergence_exit_code(tmp_path):
    cfg = short(tmp_path, 'base = "paper-a"\nt_end = 0.5\n')
    out = str(tmp_path / "t.csv")
    assert main(["run", cfg, "--out", out, "--require-convergence"]) == EXIT_NOT_CONVERGED
    ok = short(tmp_path, 't_end = 1.5\nestimator_mode = "oracle"\n[initial_pose]\nx = 2.0\ny = 1.0\ntheta = 0.0\n', "eq.toml")
    assert main(["run", ok, "--out", out, "--require-convergence"]) == EXIT_OK


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["run", short(tmp_path, "dt = -1\n")]) == EXIT_CONFIG
    assert main(["run", "no-such-scenario"]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_aborted_exit_code(tmp_path, capsys):
    cfg = short(tmp_path, 'base = "paper-a"\n[sensor_spec]\nwidth_w = 0.05\nlength_l = 0.04\n')
    assert main(["run", cfg, "--out", str(tmp_path / "t.csv")]) == EXIT_ABORTED
    assert "InitialVisibility" in capsys.readouterr().err


def test_sweep_prints_table(tmp_path, capsys):
    cfg = short(tmp_path, 'base = "paper-a"\nt_end = 0.3\n')
    grid = short(tmp_path, "gains = [[0.05, 0.2, 1.0], [0.1, 0.2, 1.0]]\n", "grid.toml")
    assert main(["sweep", cfg, "--grid", grid]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("k1,k2,k3,phi,convergence_time")
    assert [line.split(",")[:3] for line in lines[1:]] == [["0.050000000000000003", "0.20000000000000001", "1"], ["0.10000000000000001", "0.20000000000000001", "1"]]


def test_sweep_bad_grid_is_config_error(tmp_path):
    cfg = short(tmp_path, "t_end = 0.1\n")
    assert main(["sweep", cfg, "--grid", str(tmp_path / "missing.toml")]) == EXIT_CONFIG


@pytest.mark.parametrize("fig, ncols", [(5, 5), (6, 4), (7, 3), (12, 2)])
def test_plotdata(tmp_path, capsys, fig, ncols):
    cfg = short(tmp_path, 't_end = 0.2\nestimator_mode = "oracle"\n')
    trace = tmp_path / "t.csv"
    assert main(["run", cfg, "--out", str(trace)]) == EXIT_OK
    capsys.readouterr()
    assert main(["plotdata", str(trace), "--fig", str(fig)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 21 and all(len(line.split(",")) == ncols for line in lines)


def test_plotdata_rejects_non_trace(tmp_path):
    assert main(["plotdata", short(tmp_path, "a,b\n", "x.csv"), "--fig", "5"]) == EXIT_CONFIG


def test_bad_arguments_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["plotdata", "x.csv", "--fig", "8"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "circletrack", "scenarios"], capture_output=True, text=True)
    assert proc.returncode == 0 and "paper-far" in proc.stdout
