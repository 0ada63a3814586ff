import json

import pytest

from conjsec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_nf_identifies_braid_relation(capsys):
    _, a, _ = run(capsys, "nf", "--platform", "braid:3", "g1 g2 g1")
    _, b, _ = run(capsys, "nf", "--platform", "braid:3", "g2 g1 g2")
    assert a == b and a.strip()


def test_nf_free_reduction(capsys):
    code, out, _ = run(capsys, "nf", "--platform", "free:2", "g1 g2 g2^-1")
    assert code == 0 and out.strip() == "g1"


@pytest.mark.parametrize("argv", [
    ("nf", "--platform", "braid:3", "g7"),
    ("nf", "--platform", "cube:3", "g1"),
    ("frobnicate",),
    ("exchange", "--transport", "inproc", "--tap", "x.json"),
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    doc = json.loads(err.strip().splitlines()[-1])
    assert doc["exit_code"] == 2 and doc["error"] and doc["message"]


def test_exchange_is_reproducible(capsys, tmp_path):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        code, _, _ = run(capsys, "exchange", "--protocol", "aag", "--transport", "inproc",
                         "--seed", "7", "--out-dir", str(d))
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"transcript.json", "alice.key", "bob.key"}
    assert outs[0]["alice.key"] == outs[0]["bob.key"]


def test_exchange_then_attack(capsys, tmp_path):
    code, _, _ = run(capsys, "exchange", "--platform", "braid:4", "--secret-length", "4",
                     "--seed", "3", "--out-dir", str(tmp_path))
    assert code == 0
    key_out = tmp_path / "recovered.key"
    code, out, _ = run(capsys, "attack", "--transcript", str(tmp_path / "transcript.json"),
                       "--solver", "composite", "--key-out", str(key_out))
    assert code == 0
    assert json.loads(out)["key"] + "\n" == (tmp_path / "alice.key").read_text()
    assert key_out.read_text() == (tmp_path / "alice.key").read_text()


def test_attack_budget_exhausted(capsys, tmp_path):
    run(capsys, "exchange", "--platform", "braid:6", "--secret-length", "20",
        "--seed", "1", "--out-dir", str(tmp_path))
    code, out, _ = run(capsys, "attack", "--transcript", str(tmp_path / "transcript.json"),
                       "--solver", "bf", "--max-depth", "2", "--max-steps", "30")
    assert code == 4
    assert json.loads(out)["budget_exhausted"] is True


def test_attack_protocol_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"protocol": "kolee"}')
    code, _, err = run(capsys, "attack", "--transcript", str(bad))
    assert code == 3 and json.loads(err)["exit_code"] == 3
    run(capsys, "exchange", "--seed", "2", "--secret-length", "3", "--out-dir", str(tmp_path))
    code, _, _ = run(capsys, "attack", "--transcript", str(tmp_path / "transcript.json"),
                     "--platform", "braid:5")
    assert code == 3


def test_keygen_matches_exchange_tokens(capsys, tmp_path):
    run(capsys, "exchange", "--seed", "5", "--secret-length", "6", "--out-dir", str(tmp_path))
    transcript = json.loads((tmp_path / "transcript.json").read_text())
    code, out, _ = run(capsys, "keygen", "--seed", "5", "--secret-length", "6", "--role", "bob")
    doc = json.loads(out)
    assert code == 0 and doc["tokens"] == transcript["bob_tokens"]
    assert doc["secret"] not in json.dumps(transcript["published"])


def test_loopback_tcp_with_tap(capsys, tmp_path):
    tap = tmp_path / "tap.json"
    code, out, _ = run(capsys, "exchange", "--transport", "tcp", "--seed", "4",
                       "--secret-length", "6", "--tap", str(tap), "--out-dir", str(tmp_path / "t"))
    assert code == 0 and json.loads(out)["keys_agree"]
    run(capsys, "exchange", "--seed", "4", "--secret-length", "6", "--out-dir", str(tmp_path / "i"))
    assert tap.read_text() == (tmp_path / "i" / "transcript.json").read_text()


def test_bench_writes_outputs(capsys, tmp_path):
    cfg = tmp_path / "campaign.json"
    cfg.write_text(json.dumps({"platform": "free:2", "lengths": [1, 2, 3], "trials": 4,
                               "seed": 1, "budgets": {"max_steps": 2000}}))
    out = tmp_path / "out"
    code, stdout, _ = run(capsys, "bench", "--config", str(cfg), "--out", str(out))
    assert code == 0
    assert {p.name for p in out.iterdir()} == {"report.json", "trials.csv", "report.png"}
    assert json.loads(stdout)["platform"] == "free:2"
    code, _, _ = run(capsys, "bench", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_demo_multiround(capsys):
    code, out, _ = run(capsys, "demo-multiround", "--rounds", "3", "--secret-length", "3",
                       "--seed", "2", "--attack")
    doc = json.loads(out)
    assert code == 0 and doc["keys_agree"] and len(doc["round_keys"]) == 3
    assert doc["model"]["success"] == pytest.approx(0.9**3)
    assert doc["attack"]["rounds_broken"] == 3 and doc["attack"]["combined_key_recovered"]
