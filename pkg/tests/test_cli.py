import csv
import io
import json
import subprocess
import sys

import pytest

from wva.cli import main

SMALL = ["--set", "setup.phi0=0.02", "--set", "setup.alpha2=4", "--set", "setup.delta=0.1"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_state_text(capsys):
    code, out, _ = run(["state", "--preset", "fig3"], capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("p_exact")
    assert "chi <1|" in out


def test_state_json(capsys):
    code, out, _ = run(["state", "--preset", "fig3", "--format", "json"], capsys)
    data = json.loads(out)
    assert data["p_exact"] == pytest.approx(0.0100967, rel=1e-5)
    assert len(data["chi_fock"]) == 4


def test_state_csv(capsys):
    code, out, _ = run(["state", "--preset", "fig3", "--format", "csv"], capsys)
    rows = dict(csv.reader(io.StringIO(out)))
    assert rows["weak_regime"] == "true"
    assert "chi_fock_3_im" in rows


def test_sweep_csv_columns(capsys):
    code, out, _ = run(["sweep", "--preset", "fig2-inset", "--set", "sweep.points=5"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["x", "value", "variant", "stderr"]
    assert len(rows) == 1 + 3 * 5
    assert rows[1][3] == ""


def test_sweep_json(capsys):
    code, out, _ = run(["sweep", "--preset", "fig2-inset", "--set", "sweep.points=3",
                        "--format", "json"], capsys)
    data = json.loads(out)
    assert data["columns"] == ["x", "value", "variant", "stderr"]
    assert data["rows"][0]["stderr"] is None


def test_sweep_to_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(["sweep", "--preset", "fig2-inset", "--set", "sweep.points=3",
                        "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("x,value,variant,stderr\n")


def test_config_file_and_print(tmp_path, capsys):
    path = tmp_path / "c.cfg"
    path.write_text("setup.phi0 = 0.01\nsetup.alpha = 2\nsetup.delta = 0.05\n")
    code, out, _ = run(["config", "--config", str(path)], capsys)
    assert code == 0
    assert "setup.delta = 0.05" in out


def test_oracle_pass(capsys):
    code, out, _ = run(["oracle", *SMALL, "--set", "oracle.draws=5"], capsys)
    assert code == 0
    assert out.rstrip().splitlines()[-1].startswith("PASS")


def test_oracle_refuses_large_alpha(capsys):
    code, _, err = run(["oracle", "--preset", "fig3"], capsys)
    assert code == 1
    assert "|alpha|" in err


@pytest.mark.parametrize("argv,needle", [
    (["state"], "--config"),
    (["state", "--preset", "fig3", "--set", "setup.nope=1"], "setup.nope"),
    (["state", "--preset", "fig3", "--set", "setup.delta=2"], "setup.delta"),
    (["state", "--preset", "fig3", "--set", "junk"], "KEY=VALUE"),
    (["state", "--config", "/nonexistent/x.cfg"], "cannot read"),
])
def test_usage_errors(argv, needle, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert needle in err


def test_bad_command(capsys):
    assert run(["frobnicate"], capsys)[0] == 1


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(["state", "--set", "setup.phi0=0", "--set", "setup.alpha=1",
                        "--set", "setup.delta=0"], capsys)
    assert code == 2
    assert "numerical" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wva", "state", *SMALL],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "enhancement" in proc.stdout
