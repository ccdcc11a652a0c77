import json
import math
import subprocess
import sys

import pytest

from direntropy.cli import DEFAULTS, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_strip_default_has_eleven_sites(capsys):
    code, out, _ = run(capsys, "strip")
    recs = records(out)
    assert code == 0
    assert recs[0]["record"] == "config" and recs[0]["command"] == "strip"
    assert recs[1]["count"] == 11 and len(recs[1]["sites"]) == 11


def test_config_echo_is_complete(capsys, tmp_path):
    path = write_cfg(tmp_path, {"N_max": 16})
    _, out, _ = run(capsys, "--config", path, "--seed", "7", "strip")
    echo = records(out)[0]
    assert set(DEFAULTS) <= set(echo["config"])
    assert echo["config"]["seed"] == 7 and echo["config"]["N_max"] == 16
    assert echo["declarations"] == {"trivial_pinsker": False}


def test_point_mass_entropy_rows_are_zero(capsys, tmp_path):
    path = write_cfg(tmp_path, {"system": {"kind": "three_dot"}, "measure": {"kind": "point_mass"}, "N_max": 16})
    code, out, _ = run(capsys, "--config", path, "entropy")
    rows = [r for r in records(out) if r["record"] == "rate"]
    assert code == 0 and len(rows) == 3
    assert all(r["rate"] == 0.0 and all(h == 0 for _, h in r["curve"]) for r in rows)


def test_nats(capsys, tmp_path):
    path = write_cfg(tmp_path, {"N_max": 16})
    _, bits, _ = run(capsys, "--config", path, "entropy")
    _, nats, _ = run(capsys, "--config", path, "--nats", "entropy")
    rb = [r for r in records(bits) if r["record"] == "rate"]
    rn = [r for r in records(nats) if r["record"] == "rate"]
    for a, b in zip(rb, rn):
        assert b["unit"] == "nats/col"
        assert b["rate"] == pytest.approx(a["rate"] * math.log(2))


def test_csv_output(capsys, tmp_path):
    path = write_cfg(tmp_path, {"N_max": 8})
    _, out, _ = run(capsys, "--config", path, "--format", "csv", "entropy")
    lines = out.splitlines()
    assert lines[0].startswith("# ") and json.loads(lines[0][2:])["command"] == "entropy"
    assert lines[1].split(",")[:2] == ["record", "b"]


def test_out_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DIRENTROPY_OUT_DIR", str(tmp_path / "outs"))
    code, out, _ = run(capsys, "--out", "strip.ndjson", "strip")
    assert code == 0 and out == ""
    assert records((tmp_path / "outs" / "strip.ndjson").read_text())[1]["count"] == 11


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "--config", str(tmp_path / "missing.json"), "strip")[0] == 1
    assert run(capsys, "--config", write_cfg(tmp_path, {"bogus": 1}), "strip")[0] == 1
    assert run(capsys, "--config", write_cfg(tmp_path, {"N_max": 5000}), "strip")[0] == 1
    assert run(capsys, "--threads", "0", "strip")[0] == 1
    # tuples without the trivial-Pinsker declaration is a precondition failure
    code, _, err = run(capsys, "--config", write_cfg(tmp_path, {"tuples": {"budget": 1}}), "tuples")
    assert code == 2 and "DeclarationMissing" in err
    bad = {"measure": {"kind": "bernoulli", "p": [0.3, 0.7]}, "system": {"kind": "three_dot"}}
    assert run(capsys, "--config", write_cfg(tmp_path, bad), "entropy")[0] == 2


def test_tuples_certify(capsys, tmp_path):
    cfg = {
        "declarations": {"trivial_pinsker": True},
        "N_max": 8,
        "tuples": {"mode": "certify", "b": "1/2", "tol": 0.05,
                   "cylinders": [{"window": [[0, 0]], "patterns": [[0]]}, {"window": [[0, 0]], "patterns": [[1]]}]},
    }
    code, out, _ = run(capsys, "--config", write_cfg(tmp_path, cfg), "tuples")
    assert code == 0 and records(out)[1]["kind"] == "entropy-tuple-certified"


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    recs = records(out)
    assert code == 0 and recs[-1] == {"record": "selftest_summary", "checks": 9, "failed": 0}


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "direntropy.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
