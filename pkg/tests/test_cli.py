import json

import pytest

from padic_rmt.cli import main
from padic_rmt.harness import dumps
from padic_rmt.qcore import DiscreteLaw


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_pmf_series(capsys):
    code, out = run_cli(capsys, "pmf", "--k", "1", "--t", "1/2", "--chi", "1.0",
                        "--L", "0")
    assert code == 0
    rec = json.loads(out)
    assert rec["method"] == "series"
    assert abs(rec["pmf"] - 0.42073042153167206) < 1e-12


def test_pmf_methods_agree(capsys):
    vals = {}
    for method in ("series", "contour", "closed"):
        code, out = run_cli(capsys, "pmf", "--k", "2", "--t", "1/2", "--chi", "1.0",
                            "--L", "2", "0", "--method", method)
        assert code == 0
        vals[method] = json.loads(out)["pmf"]
    assert abs(vals["series"] - vals["contour"]) < 1e-8
    assert abs(vals["series"] - vals["closed"]) < 1e-10


def test_usage_when_no_command(capsys):
    code, _ = run_cli(capsys)
    assert code == 0


def test_sample_hl_reproducible_with_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("RMT_SEED", "4242")
    _, out1 = run_cli(capsys, "sample-hl", "--n", "3", "--t", "1/2",
                      "--steps", "2", "--samples", "4")
    _, out2 = run_cli(capsys, "sample-hl", "--n", "3", "--t", "1/2",
                      "--steps", "2", "--samples", "4")
    assert out1 == out2
    for line in out1.strip().splitlines():
        rec = json.loads(line)
        parts = rec["parts"]
        assert parts == sorted(parts, reverse=True)


def test_simulate_writes_report(capsys, tmp_path):
    out_path = tmp_path / "run.jsonl"
    code, out = run_cli(capsys, "simulate", "--experiment", "thm10.3",
                        "--N", "6", "--tau", "16.0", "--k", "1",
                        "--samples", "3000", "--seed", "5",
                        "--output", str(out_path))
    rec = json.loads(out)
    assert rec["experiment"] == "thm10.3"
    assert code == (0 if rec["pass"] else 1)
    assert out_path.exists()
    assert (tmp_path / "run.csv").exists()


def test_simulate_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "appB", "N": 2, "tau": 2.0,
                               "K": 12, "samples": 4000, "seed": 11}))
    code, out = run_cli(capsys, "simulate", "--config", str(cfg))
    rec = json.loads(out)
    assert rec["experiment"] == "appB"
    assert rec["pass"] in (True, False)


def test_verify_exit_code(capsys):
    code, out = run_cli(capsys, "verify")
    assert code == 0
    assert json.loads(out)["all_passed"]


def test_compare(capsys, tmp_path):
    a = DiscreteLaw({(0,): 0.6, (1,): 0.4})
    b = DiscreteLaw({(0,): 0.5, (1,): 0.5})
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pa.write_text(dumps(a.to_json_dict()))
    pb.write_text(dumps(b.to_json_dict()))
    code, out = run_cli(capsys, "compare", "--a", str(pa), "--b", str(pb))
    assert code == 0
    assert abs(json.loads(out)["dinf"] - 0.1) < 1e-12
    code, out = run_cli(capsys, "compare", "--a", str(pa), "--b", str(pb),
                        "--tolerance", "0.05")
    assert code == 1
