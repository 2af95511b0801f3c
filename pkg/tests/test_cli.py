"""Command line interface: exit codes, overrides, byte-identical outputs."""

import json
import os
import subprocess
import sys

import pytest

from qnetsim.cli import main
from qnetsim.config import dump_config, linear_config

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "net.json"
    dump_config(linear_config(3, 10.0, stop_time_s=100.0, seed=1, applications=True), path)
    return str(path)


def read_outputs(out):
    return {name: open(os.path.join(out, name), "rb").read()
            for name in ("throughput.csv", "utilization.csv", "requests.csv")}


def test_same_seed_identical_bytes(small_config, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--config", small_config, "--stop", "3", "--seed", "7", "--out", str(a)]) == 0
    assert main(["--config", small_config, "--stop", "3", "--seed", "7", "--out", str(b)]) == 0
    assert read_outputs(a) == read_outputs(b)
    out = capsys.readouterr().out
    assert "pairs_delivered" in out and "wrote throughput" in out


def test_seed_changes_outputs(small_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["--config", small_config, "--stop", "3", "--seed", "1", "--out", str(a)])
    main(["--config", small_config, "--stop", "3", "--seed", "2", "--out", str(b)])
    assert read_outputs(a)["requests.csv"] != read_outputs(b)["requests.csv"]


def test_stop_overrides_config(small_config, tmp_path):
    out = tmp_path / "o"
    main(["--config", small_config, "--stop", "1.5", "--out", str(out)])
    rows = read_outputs(out)["utilization.csv"].decode().splitlines()
    assert len(rows) - 1 == 3 * 15


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nodes": []}))
    assert main(["--config", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "nope.json")]) == 1


def test_bad_stop_is_config_error(small_config):
    assert main(["--config", small_config, "--stop", "-1"]) == 1


def test_runtime_error_exit_code(small_config, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    # output directory cannot be created under a regular file
    assert main(["--config", small_config, "--stop", "0.2", "--out", str(blocker / "sub")]) == 2


def test_bad_flags_exit_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--bogus"])
    assert exc.value.code != 0
    assert "usage" in capsys.readouterr().err


def test_console_script_and_backends_agree(small_config, tmp_path):
    """The pure-Python modules and the compiled ones give byte-identical outputs."""
    outs = []
    for pure in ("0", "1"):
        out = tmp_path / f"p{pure}"
        env = {**os.environ, "QNETSIM_PURE_PYTHON": pure}
        proc = subprocess.run([sys.executable, "-m", "qnetsim.cli", "--config", small_config,
                               "--stop", "1.5", "--seed", "3", "--out", str(out)],
                              env=env, capture_output=True, text=True, cwd=ROOT)
        assert proc.returncode == 0, proc.stderr
        outs.append(read_outputs(out))
    assert outs[0] == outs[1]
