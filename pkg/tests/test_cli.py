import csv
import io
import json
import subprocess
import sys

import pytest

from fogcert.cli import EXIT_CONFIG, EXIT_OK, EXIT_TRACE, main
from fogcert.config import load_config

SMALL = ["--duration-s", "180", "--producers", "12", "--set", "publish.tail_ms=10000"]


def run(tmp_path, *argv, environ=None, name="out.csv"):
    out = tmp_path / name
    rc = main([*argv, "--out", str(out)], environ or {})
    return rc, out


def rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_fixed_sweep_writes_rows_and_config(tmp_path):
    rc, out = run(tmp_path, "--arch", "fixed", "--pf", "0", "--seeds", "1..3", *SMALL)
    assert rc == EXIT_OK
    r = rows(out)
    assert [x["seed"] for x in r] == ["1", "2", "3", "1;2;3"]
    assert all(x["df_cert"] == "0" for x in r)
    cfg = load_config(str(out) + ".config")
    assert cfg.seeds == [1, 2, 3] and cfg["radio.loss_prob"] == 0.01 and cfg["duration_ms"] == 180_000


def test_assigned_nls_never_queues(tmp_path):
    rc, out = run(tmp_path, "--arch", "assigned-nls", "--pf", "0.3", "--seeds", "4", *SMALL)
    assert rc == EXIT_OK
    (r,) = rows(out)
    assert r["queued"] == "0" and r["lost"] == "0" and r["strategy"] == "nls"


def test_bad_pf(tmp_path):
    rc, out = run(tmp_path, "--pf", "1.5")
    assert rc == EXIT_CONFIG and not out.exists()


def test_bad_set(tmp_path):
    assert run(tmp_path, "--set", "nonsense")[0] == EXIT_CONFIG
    assert run(tmp_path, "--set", "radio.power=1")[0] == EXIT_CONFIG


def test_missing_trace(tmp_path):
    rc, _ = run(tmp_path, "--trace", str(tmp_path / "none.tcl"), "--seeds", "1")
    assert rc == EXIT_TRACE


def test_unknown_scenario(tmp_path):
    assert run(tmp_path, "--scenario", "nope")[0] == EXIT_CONFIG


def test_scenario_with_audit(tmp_path):
    audit = tmp_path / "audit.csv"
    rc, out = run(tmp_path, "--scenario", "fig7", "--audit", str(audit))
    assert rc == EXIT_OK
    assert rows(out)[0]["lost"] == "2"
    assert [a["first_outcome"] for a in rows(audit)] == ["lost", "delivered", "queued", "lost"]


def test_env_base_config_and_flags_win(tmp_path):
    base = tmp_path / "base.conf"
    base.write_text("architecture=collaborative\npf=0.8\nproducers=12\nduration_ms=120000\npublish.tail_ms=0\n")
    rc, out = run(tmp_path, "--pf", "0.2", "--seeds", "2", environ={"FOGCERT_CONFIG": str(base)})
    assert rc == EXIT_OK
    (r,) = rows(out)
    assert (r["arch"], r["pf"]) == ("collaborative", "0.2")


def test_missing_env_config(tmp_path):
    assert run(tmp_path, environ={"FOGCERT_CONFIG": str(tmp_path / "gone")})[0] == EXIT_CONFIG


@pytest.mark.parametrize("fmt", ["csv", "json", "table"])
def test_output_is_byte_identical(tmp_path, fmt):
    argv = ["--arch", "collaborative", "--pf", "0.3", "--seeds", "1,2", "--format", fmt, *SMALL]
    _, a = run(tmp_path, *argv, name="a")
    _, b = run(tmp_path, *argv, name="b")
    assert a.read_bytes() == b.read_bytes()
    if fmt == "json":
        assert len(json.loads(a.read_text())) == 3


def test_parallel_workers_match_serial(tmp_path):
    argv = ["--arch", "fixed", "--pf", "0.3", "--seeds", "1,2", *SMALL]
    _, a = run(tmp_path, *argv, name="a")
    _, b = run(tmp_path, *argv, "--workers", "2", name="b")
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "fogcert", "--scenario", "lonely-cls", "--format", "json"],
                       capture_output=True, text=True, check=True)
    assert json.loads(p.stdout)[0]["df_cert"] == 1
