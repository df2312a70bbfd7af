import json
import os
import subprocess
import sys

import pytest

from mgrit_advect.cli import main, parse_size


def test_parse_size():
    assert parse_size("2^8x2^10") == 2**18
    assert parse_size("(2^6)^2x2^10") == 2**22
    assert parse_size("1024") == 1024
    with pytest.raises(ValueError):
        parse_size("abc")


def test_run_writes_reports(tmp_path):
    out = str(tmp_path / "solve")
    rc = main(["run", "--nx", "32", "--nt", "64", "--max-levels", "2",
               "--schedule", "4", "-o", out])
    assert rc == 0
    with open(out + ".json", encoding="utf-8") as fh:
        payload = json.load(fh)
    assert payload["status"] == "converged"
    assert payload["config"]["n_x"] == 32
    assert len(payload["residual_norms"]) == payload["iterations"] + 1
    lines = open(out + ".csv", encoding="utf-8").read().splitlines()
    assert lines[0] == "iteration,residual_norm"
    assert len(lines) == payload["iterations"] + 2


def test_run_reports_divergence_as_success(tmp_path):
    out = str(tmp_path / "div")
    rc = main(["run", "--nx", "128", "--nt", "4096", "--max-levels", "2",
               "--schedule", "4", "--operator", "rediscretized",
               "--departure-policy", "erk_rediscretized",
               "--dt", str(0.7 * 2.0 / 128), "-o", out])
    assert rc == 0
    payload = json.load(open(out + ".json", encoding="utf-8"))
    assert payload["status"] == "diverged"


def test_run_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"n_x": 32, "n_t": 64, "max_levels": 2, "p": 3}))
    out = str(tmp_path / "cfgd")
    rc = main(["run", "--config", str(cfg_file), "-p", "1", "-o", out])
    assert rc == 0
    payload = json.load(open(out + ".json", encoding="utf-8"))
    assert payload["config"]["p"] == 1  # flag overrides the file
    assert payload["config"]["n_x"] == 32


def test_usage_errors():
    assert main(["run", "--nx", "32"]) == 2  # missing --nt
    with pytest.raises(SystemExit) as exc:
        main(["run", "--operator", "bogus", "--nx", "8", "--nt", "8"])
    assert exc.value.code == 2
    assert main(["run", "--config", "/nonexistent.json", "--nx", "8", "--nt", "8"]) == 2


def test_lfa_csv(tmp_path):
    out = str(tmp_path / "curves")
    rc = main(["lfa", "-p", "1", "--m-list", "2,4", "--c-min", "0.5",
               "--c-max", "0.6", "--c-step", "0.05", "--coarse-kind",
               "corrected", "-o", out])
    assert rc == 0
    lines = open(out + ".csv", encoding="utf-8").read().splitlines()
    assert lines[0] == "p,m,c,rho,coarse_kind"
    assert len(lines) == 1 + 2 * 3  # 2 m values x 3 c values
    # rerun is byte-identical
    rc = main(["lfa", "-p", "1", "--m-list", "2,4", "--c-min", "0.5",
               "--c-max", "0.6", "--c-step", "0.05", "--coarse-kind",
               "corrected", "-o", out + "2"])
    assert open(out + ".csv", "rb").read() == open(out + "2.csv", "rb").read()


def test_table_header_only_when_cap_too_small(tmp_path):
    out = str(tmp_path / "tiny")
    rc = main(["table", "two_level_1d", "--size-cap", "100", "-o", out])
    assert rc == 0
    lines = open(out + ".csv", encoding="utf-8").read().splitlines()
    assert len(lines) == 1  # header only


def test_verify_stability_suite(tmp_path):
    out = str(tmp_path / "stab")
    rc = main(["verify", "stability", "-o", out])
    assert rc == 0
    payload = json.load(open(out + ".json", encoding="utf-8"))
    assert payload["passed"]
    assert {c["check"] for c in payload["checks"]} == {
        "B_symbol_p1", "B_symbol_p3", "B_symbol_p5"}


def test_verify_footnote_suite(tmp_path):
    out = str(tmp_path / "foot")
    rc = main(["verify", "footnote_equivalence", "-o", out])
    assert rc == 0
    payload = json.load(open(out + ".json", encoding="utf-8"))
    assert payload["passed"]


def test_env_seed_default(tmp_path):
    env = dict(os.environ, MGRIT_ADVECT_SEED="42")
    out = str(tmp_path / "seeded")
    code = ("import sys; from mgrit_advect.cli import main; "
            f"sys.exit(main(['run','--nx','32','--nt','64','--max-levels','2','-o',{str(out)!r}]))")
    subprocess.run([sys.executable, "-c", code], env=env, check=True)
    payload = json.load(open(out + ".json", encoding="utf-8"))
    assert payload["config"]["seed"] == 42


def test_entry_point_installed():
    proc = subprocess.run(["mgrit-advect", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("run", "table", "lfa", "verify"):
        assert sub in proc.stdout
