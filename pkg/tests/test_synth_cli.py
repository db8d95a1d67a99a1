import json

import pytest

from keyactor.cli import main
from keyactor.corpus import validate_corpus
from keyactor.synth import SyntheticSpec, generate_corpus


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_generate_corpus_valid_and_planted():
    spec = SyntheticSpec(users=80, key_fraction=0.2, seed=3)
    corpus, truth = generate_corpus(spec)
    assert validate_corpus(corpus) == []
    keys = [u for u in truth.values() if u == "key"]
    assert len(keys) == round(80 * 0.2)
    key_users = [u for u in corpus.users if truth[u.user_id] == "key"]
    non_key = [u for u in corpus.users if truth[u.user_id] == "non-key"]
    assert min(u.reputation for u in key_users) > max(0, *(0,)) and min(u.reputation for u in key_users) > 100
    assert max(u.reputation for u in non_key) <= 100


def test_synth_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(users=100, key_fraction=0.0)
    with pytest.raises(ValueError):
        SyntheticSpec(users=100, signal=0.0)
    with pytest.raises(ValueError):
        SyntheticSpec(users=5)


def test_synth_cli_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli("synth", "--out-dir", out, "--users", 60, "--key-fraction", 0.15, "--seed", 7) == 0
    assert (a / "corpus.jsonl").read_bytes() == (b / "corpus.jsonl").read_bytes()
    assert (a / "truth.jsonl").read_bytes() == (b / "truth.jsonl").read_bytes()


def test_synth_seed_changes_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("synth", "--out-dir", a, "--users", 60, "--seed", 1)
    run_cli("synth", "--out-dir", b, "--users", 60, "--seed", 2)
    assert (a / "corpus.jsonl").read_bytes() != (b / "corpus.jsonl").read_bytes()


def test_missing_upstream_artifact_is_data_error(tmp_path, caplog):
    code = run_cli("ingest", "--in", tmp_path / "nope.jsonl", "--out", tmp_path / "out.jsonl")
    assert code == 2
    assert "nope.jsonl" in caplog.text


def test_usage_error_exit_code_one():
    with pytest.raises(SystemExit) as exc:
        run_cli("train")  # missing required flags
    assert exc.value.code == 1


def test_unknown_subcommand_exit_code_one():
    with pytest.raises(SystemExit) as exc:
        run_cli("frobnicate")
    assert exc.value.code == 1


def test_evaluate_perfect_predictions(tmp_path):
    labels = tmp_path / "labels.jsonl"
    preds = tmp_path / "preds.jsonl"
    with labels.open("w") as fh:
        for i, lab in enumerate(["key", "non-key", "key"]):
            fh.write(json.dumps({"user_id": f"u{i}", "label": lab, "provenance": "auto", "rule_hits": None}) + "\n")
    with preds.open("w") as fh:
        for i, lab in enumerate(["key", "non-key", "key"]):
            fh.write(json.dumps({"user_id": f"u{i}", "prediction": lab, "prob_key": 0.9, "split": "test"}) + "\n")
    out = tmp_path / "metrics.json"
    assert run_cli("evaluate", "--predictions", preds, "--labels", labels, "--out", out) == 0
    metrics = json.loads(out.read_text())
    assert metrics["accuracy"] == 1.0 and metrics["f1"] == 1.0


def test_config_file_supplies_defaults_and_flags_override(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"synth": {"users": 40, "key_fraction": 0.25}, "seed": 5}))
    out1 = tmp_path / "from_config"
    assert run_cli("synth", "--config", config, "--out-dir", out1) == 0
    rows = [json.loads(l) for l in (out1 / "corpus.jsonl").read_text().splitlines()]
    assert sum(1 for r in rows if r["kind"] == "user") == 40

    out2 = tmp_path / "flag_wins"
    assert run_cli("synth", "--config", config, "--out-dir", out2, "--users", 25) == 0
    rows = [json.loads(l) for l in (out2 / "corpus.jsonl").read_text().splitlines()]
    assert sum(1 for r in rows if r["kind"] == "user") == 25


def test_ingest_rejects_corrupt_corpus(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"kind": "post", "post_id": "p1", "thread_id": "t", "author_id": "u", "body": "x", "created_at": "2020-01-01T00:00:00Z"}\n')
    code = run_cli("ingest", "--in", bad, "--out", tmp_path / "out.jsonl")
    assert code == 2
