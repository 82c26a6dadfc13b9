import subprocess
import sys

import pytest

from gibbslab import cli
from gibbslab.experiments import Report


def test_decay_to_stdout(capsys):
    assert cli.main(["decay", "--beta", "0.25", "--k-max", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4 and out[0].startswith("k,")


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("beta=1.2\nk_max=2\n")
    out = tmp_path / "o.csv"
    assert cli.main(["decay", "--config", str(cfg), "--out", str(out)]) == 0
    assert out.read_text().count("nonunique") == 2
    assert cli.main(["decay", "--config", str(cfg), "--beta", "0.1", "--out", str(out)]) == 0
    assert "nonunique" not in out.read_text()


def test_error_exit_code(capsys):
    assert cli.main(["decay", "--beta", "nan"]) == 1
    assert "error" in capsys.readouterr().err
    assert cli.main(["count-colorings", "--graph", "no-such-file.txt"]) == 1


def test_violation_exit_code(monkeypatch, capsys):
    monkeypatch.setitem(cli.SUBCOMMANDS, "decay", lambda cfg: Report(["x"], [{"x": 1}], True))
    assert cli.main(["decay"]) == 2


@pytest.mark.parametrize("argv", [
    ["count-colorings", "--n", "2,4"],
    ["cover-stats", "--n", "20", "--trials", "3"],
    ["edge-vertex", "--graph", "K4", "--method", "exact"],
    ["concentration", "--n", "10", "--trials", "4", "--sweeps", "5"],
])
def test_subcommands_run(argv, capsys):
    assert cli.main(argv) == 0
    assert capsys.readouterr().out.count("\n") >= 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "gibbslab", "decay", "--k-max", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("k,")
