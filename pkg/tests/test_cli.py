import csv
import json
import os
import subprocess
import sys

import pytest

from helmbench.cli import EXIT_BAD_CONFIG, EXIT_FAILED, EXIT_OK, main
from helmbench.config import ConfigError, parse_config


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_plan_row1(tmp_path):
    cfg = write(tmp_path, 'experiment = "plan"\nk = [10.0]\np = [1]\n[plan]\nrule = "regime"\nrows = [1]\nc = 0.5\n')
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out)]) == EXIT_OK
    plans = json.loads((out / "plan.json").read_text())
    assert len(plans) == 1
    assert plans[0]["hk"]["K"] == pytest.approx(0.5 / 30, rel=1e-12)
    assert plans[0]["hk"]["P"] == pytest.approx(0.5, rel=1e-12)
    table = rows(out / "plan.csv")
    assert {r["region"] for r in table} == {"K", "V", "I", "P"}
    man = json.loads((out / "manifest.json").read_text())
    assert man["status"] == "ok"
    assert man["summary"]["max_term_deviation"] <= 1e-12
    for key in ("config", "config_hash", "seed", "versions", "wallclock_s", "files", "experiment"):
        assert key in man
    assert len(man["config_hash"]) == 64


def test_experiment_flag_without_config(tmp_path):
    out = tmp_path / "o"
    assert main(["--experiment", "plan", "--out", str(out)]) == EXIT_OK
    assert (out / "plan.csv").exists()


@pytest.mark.parametrize("text", [
    'experiment = "plan"\nbogus = 1\n',
    'experiment = "plan"\n[plan]\nrows = [9]\nfoo = 2\n',
    'experiment = "nope"\n',
    'experiment = "plan"\nk = [-1.0]\n',
    'experiment = "fem-convergence"\n[pml]\nR_scat = 3.0\nR_PML = 2.0\n',
    'this is = = not toml',
])
def test_malformed_config_exit2_no_outputs(tmp_path, text, capsys):
    cfg = write(tmp_path, text)
    out = tmp_path / "never"
    assert main(["--config", cfg, "--out", str(out)]) == EXIT_BAD_CONFIG
    assert not out.exists()
    assert "error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["--config", str(tmp_path / "absent.toml"), "--out", str(tmp_path / "x")]) == EXIT_BAD_CONFIG


def test_bad_threads(tmp_path):
    assert main(["--experiment", "plan", "--out", str(tmp_path / "x"), "--threads", "0"]) == EXIT_BAD_CONFIG
    assert not (tmp_path / "x").exists()


BEM_SMALL = """experiment = "bem-pollution"
k = [4.0]
[bem]
cases = [{kind = "AkPrime", p = 0, ppw = 8.0, k = [4.0, 6.0]}, {kind = "Breg", p = 1, ppw = 6.0, k = [4.0]}]
"""


def test_determinism_byte_identical(tmp_path):
    cfg = write(tmp_path, BEM_SMALL)
    for name in ("a", "b"):
        assert main(["--config", cfg, "--out", str(tmp_path / name)]) == EXIT_OK
    a = (tmp_path / "a" / "bem_pollution.csv").read_bytes()
    assert a == (tmp_path / "b" / "bem_pollution.csv").read_bytes()
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert ma["config_hash"] == mb["config_hash"]
    assert len(rows(tmp_path / "a" / "bem_pollution.csv")) == 3


def test_failure_record_keeps_partial_outputs(tmp_path):
    # the second case asks for a 1-element boundary grid, which is rejected
    cfg = write(tmp_path, """experiment = "bem-pollution"
k = [4.0]
[bem]
cases = [{kind = "AkPrime", p = 0, ppw = 8.0, k = [4.0]}, {kind = "Breg", p = 0, ppw = 0.1, k = [4.0]}]
""")
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out)]) == EXIT_FAILED
    fail = json.loads((out / "failure.json").read_text())
    assert fail["error_type"] == "ValueError"
    assert fail["completed_rows"] == 1
    assert "Traceback" in fail["traceback"]
    assert len(rows(out / "bem_pollution.csv")) == 1
    assert json.loads((out / "manifest.json").read_text())["status"] == "failed"


def test_fem_convergence_small(tmp_path):
    cfg = write(tmp_path, """experiment = "fem-convergence"
k = [3.0]
p = [1]
[pml]
R_scat = 1.5
R_PML = 2.0
R_tr = 2.6
[mesh]
h = [0.4, 0.28]
""")
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out)]) == EXIT_OK
    table = rows(out / "fem_convergence.csv")
    assert len(table) == 2
    e = [float(r["rel_error_H1k"]) for r in table]
    assert e[1] < e[0] < 1


def test_config_hash_changes_with_content():
    a = parse_config('experiment = "plan"\n')
    b = parse_config('experiment = "plan"\n[plan]\nc = 0.25\n')
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == parse_config('experiment = "plan"\nseed = 0\n').config_hash()
    assert a.config_hash() == parse_config('experiment = "plan"\n', output="elsewhere").config_hash()
    with pytest.raises(ConfigError):
        parse_config("")


def test_module_entry_point(tmp_path):
    out = tmp_path / "m"
    proc = subprocess.run(
        [sys.executable, "-m", "helmbench", "--experiment", "plan", "--out", str(out), "--threads", "1"],
        capture_output=True, text=True, env={**os.environ},
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads((out / "manifest.json").read_text())["threads"] == 1
