"""CLI behavior: exit codes, file outputs, config precedence, data dir."""

from __future__ import annotations

import json

import pytest

from drillforge.cli import main
from drillforge.storage import load_drill_set


def write_pools(path, n_correct=6, n_distractors=12):
    doc = {
        "correct": [
            {"text": f"right {i}", "explanation": f"because {i}"} for i in range(n_correct)
        ],
        "distractors": [{"text": f"wrong {i}"} for i in range(n_distractors)],
    }
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def write_template(path, seed=3):
    doc = {
        "body": "What is {a} + {b}?",
        "vars": {"a": [1, 9], "b": [1, 9]},
        "answer": "a + b",
        "distractors": ["a + b + 1", "a - b", "a * b"],
        "n_items": 12,
        "seed": seed,
        "id": "tmpl-add",
    }
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Authoring commands
# ---------------------------------------------------------------------------

def test_generate_writes_drill_set(tmp_path, capsys):
    pools = write_pools(tmp_path / "pools.json")
    header = tmp_path / "header.txt"
    header.write_text("Pick the right answer.\n", encoding="utf-8")
    out = tmp_path / "set.json"
    rc = main([
        "generate", "--pools", str(pools), "--header", str(header),
        "--n", "40", "--seed", "42", "--out", str(out),
    ])
    assert rc == 0
    assert "40 items" in capsys.readouterr().out
    ds = load_drill_set(out)
    assert len(ds.items) == 40
    assert ds.header == "Pick the right answer."


def test_generate_is_deterministic(tmp_path):
    pools = write_pools(tmp_path / "pools.json")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["generate", "--pools", str(pools), "--n", "25",
                     "--seed", "7", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_missing_pools_file_is_io_error(tmp_path):
    rc = main(["generate", "--pools", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "set.json")])
    assert rc == 3


def test_generate_bad_pools_json_is_validation_error(tmp_path):
    bad = tmp_path / "pools.json"
    bad.write_text("{not json", encoding="utf-8")
    rc = main(["generate", "--pools", str(bad), "--out", str(tmp_path / "s.json")])
    assert rc == 2


def test_template_command(tmp_path, capsys):
    tpl = write_template(tmp_path / "template.json")
    out = tmp_path / "set.json"
    assert main(["template", "--in", str(tpl), "--out", str(out)]) == 0
    ds = load_drill_set(out)
    assert ds.id == "tmpl-add"
    assert len(ds.items) == 12
    assert all(item.stem for item in ds.items)


def test_template_seed_override_changes_output(tmp_path):
    tpl = write_template(tmp_path / "template.json", seed=3)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["template", "--in", str(tpl), "--out", str(a)]) == 0
    assert main(["template", "--in", str(tpl), "--out", str(b), "--seed", "99"]) == 0
    assert a.read_bytes() != b.read_bytes()


# ---------------------------------------------------------------------------
# Simulation and grading
# ---------------------------------------------------------------------------

def test_simulate_to_stdout_and_file(tmp_path, capsys):
    args = ["simulate", "--students", "2", "--ability", "1.0", "--sets", "2",
            "--seed", "5"]
    assert main(args) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["aggregate"]["total_attempts"] == 2 * 2 * 7

    out = tmp_path / "report.json"
    assert main(args + ["--out", str(out)]) == 0
    assert json.loads(out.read_text()) == report


def test_simulate_validation_error(tmp_path):
    assert main(["simulate", "--ability", "1.5"]) == 2


def test_config_supplies_defaults_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "simulate": {"students": 3, "ability": 1.0, "sets": 1, "seed": 4},
        "rewards": {"per_set_ace": 50, "per_collection_ace": 1000},
    }), encoding="utf-8")
    assert main(["simulate", "--config", str(cfg)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["spec"]["n_students"] == 3
    assert report["students"][0]["smly"] == 50 + 1000

    assert main(["simulate", "--config", str(cfg), "--students", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["spec"]["n_students"] == 1


def drillforge_data_setup(tmp_path, capsys):
    """Build a data dir with a library, an account, and one uploaded set."""
    data = tmp_path / "data"
    pools = write_pools(tmp_path / "pools.json")
    set_path = tmp_path / "set.json"
    assert main(["generate", "--pools", str(pools), "--n", "10",
                 "--seed", "1", "--out", str(set_path), "--set-id", "ds-demo"]) == 0
    assert main(["library", "--data", str(data), "--name", "Main"]) == 0
    assert main(["upload", "--data", str(data), "--set", str(set_path),
                 "--collection", "course"]) == 0
    assert main(["account", "--data", str(data), "--kind", "pre_registered",
                 "--library", "lib-1"]) == 0
    out = capsys.readouterr().out
    account = json.loads(out[out.index("{"):])
    return data, account


def test_grade_from_event_log(tmp_path, capsys):
    data, account = drillforge_data_setup(tmp_path, capsys)
    rc = main(["grade", "--data", str(data), "--student", account["account_id"],
               "--set", "ds-demo"])
    assert rc == 0
    grade = json.loads(capsys.readouterr().out)
    assert grade == {"grade": 0.0, "taper_len": 7, "complete": False, "aced": False}

    assert main(["grade", "--data", str(data), "--student", "ghost",
                 "--set", "ds-demo"]) == 2


def test_ledger_commands_persist_across_invocations(tmp_path, capsys):
    data, account = drillforge_data_setup(tmp_path, capsys)
    acct = account["account_id"]
    assert main(["ledger", "mint", acct, "750", "--data", str(data)]) == 0
    capsys.readouterr()
    assert main(["ledger", "balance", acct, "--data", str(data)]) == 0
    out = capsys.readouterr().out
    assert json.loads(out) == {"account_id": acct, "balance": 750}

    assert main(["account", "--data", str(data), "--kind", "self_registered"]) == 0
    out = capsys.readouterr().out
    other = json.loads(out[out.index("{"):])["account_id"]
    assert main(["ledger", "transfer", acct, other, "200", "--data", str(data)]) == 0
    capsys.readouterr()
    assert main(["ledger", "balance", other, "--data", str(data)]) == 0
    assert json.loads(capsys.readouterr().out)["balance"] == 200

    # insufficient funds maps to exit code 2
    assert main(["ledger", "transfer", other, acct, "9999", "--data", str(data)]) == 2


def test_data_dir_from_environment(tmp_path, capsys, monkeypatch):
    data = tmp_path / "envdata"
    monkeypatch.setenv("DRILLFORGE_DATA", str(data))
    assert main(["library", "--name", "EnvBranch"]) == 0
    assert (data / "events.jsonl").exists()


def test_upload_duplicate_set_fails_cleanly(tmp_path, capsys):
    data, account = drillforge_data_setup(tmp_path, capsys)
    set_path = tmp_path / "set.json"
    assert main(["upload", "--data", str(data), "--set", str(set_path)]) == 2
