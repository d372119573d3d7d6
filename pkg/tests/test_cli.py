from __future__ import annotations

import json
from pathlib import Path

import pytest

from conftest import FIXTURES, REPO_ROOT

from kqlforge.cli import main


@pytest.fixture()
def replay_config(tmp_path) -> Path:
    config = {
        "mode": "two_stage",
        "schema_path": str(FIXTURES / "defender_schema.json"),
        "dataset_path": str(FIXTURES / "defender_eval_20.jsonl"),
        "tables_store_path": str(FIXTURES / "stores" / "tables.ejsonl"),
        "values_store_path": str(FIXTURES / "stores" / "values.ejsonl"),
        "fsdb_store_path": str(FIXTURES / "stores" / "fsdb.ejsonl"),
        "replay_fixture_path": str(FIXTURES / "replay_two_stage.jsonl"),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as err:
        main(["eval", "--definitely-not-a-flag"])
    assert err.value.code == 2


def test_no_subcommand_exits_2():
    assert main([]) == 2


def test_missing_config_file_exits_2(tmp_path):
    assert main(["eval", "--config", str(tmp_path / "nope.json")]) == 2


def test_build_catalog(tmp_path):
    out = tmp_path / "stores"
    code = main([
        "build-catalog",
        "--schema", str(FIXTURES / "defender_schema.json"),
        "--fsdb", str(FIXTURES / "fsdb_examples.jsonl"),
        "--out", str(out),
    ])
    assert code == 0
    for name in ("tables.ejsonl", "values.ejsonl", "fsdb.ejsonl"):
        assert (out / name).exists()
    first = json.loads((out / "tables.ejsonl").read_text().splitlines()[0])
    assert first["kind"] == "table" and "vector" in first


def test_build_catalog_matches_committed_stores(tmp_path):
    out = tmp_path / "stores"
    main([
        "build-catalog",
        "--schema", str(FIXTURES / "defender_schema.json"),
        "--fsdb", str(FIXTURES / "fsdb_examples.jsonl"),
        "--out", str(out),
    ])
    for name in ("tables.ejsonl", "values.ejsonl", "fsdb.ejsonl"):
        assert (out / name).read_text() == (FIXTURES / "stores" / name).read_text()


def test_translate_replay_prints_kql(replay_config, tmp_path, capsys, dataset):
    trace_path = tmp_path / "trace.json"
    code = main([
        "translate",
        "--config", str(replay_config),
        "--backend", "replay",
        "--nlq", dataset[0]["nlq"],
        "--out", str(trace_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert dataset[0]["kql"] in out
    trace = json.loads(trace_path.read_text())
    assert trace["final_kql"] == dataset[0]["kql"]


def test_translate_replay_miss_exits_1(replay_config, tmp_path, capsys):
    code = main([
        "translate",
        "--config", str(replay_config),
        "--backend", "replay",
        "--nlq", "this was never recorded",
        "--out", str(tmp_path / "trace.json"),
    ])
    assert code == 1
    err = capsys.readouterr().err
    assert "no recorded response" in err


def test_translate_mock_backend(replay_config, tmp_path, capsys):
    code = main([
        "translate",
        "--config", str(replay_config),
        "--backend", "mock",
        "--nlq", "whatever you like",
        "--out", str(tmp_path / "trace.json"),
    ])
    assert code == 0


def test_eval_writes_report_and_table(replay_config, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code = main([
        "eval",
        "--config", str(replay_config),
        "--backend", "replay",
        "--out", str(report_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["summary"]["syntax"] == 1.0
    assert report_path.with_suffix(".txt").exists()
    out = capsys.readouterr().out
    assert "Syntax" in out and "Semantic" in out


def test_eval_is_deterministic_across_runs(replay_config, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        assert main([
            "eval", "--config", str(replay_config), "--backend", "replay",
            "--out", str(path),
        ]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_eval_flag_overrides(replay_config, tmp_path):
    report_path = tmp_path / "report.json"
    code = main([
        "eval",
        "--config", str(replay_config),
        "--backend", "replay",
        "--t", "3",
        "--temperature", "0.2",
        "--out", str(report_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["config"]["resolved_t"] == 3
    assert report["config"]["generator_temperature"] == 0.2


def test_sweep_t_grid_writes_reports_and_index(replay_config, tmp_path):
    out = tmp_path / "sweep"
    code = main([
        "sweep",
        "--config", str(replay_config),
        "--backend", "replay",
        "--knob", "t=1,3,5,7,9",
        "--out", str(out),
    ])
    assert code == 0
    index = json.loads((out / "index.json").read_text())
    assert [entry["tag"] for entry in index] == ["t=1", "t=3", "t=5", "t=7", "t=9"]
    report_files = sorted(out.glob("point_*.json"))
    assert len(report_files) == 5


def test_sweep_requires_knob(replay_config, tmp_path):
    assert main([
        "sweep", "--config", str(replay_config), "--backend", "replay",
        "--out", str(tmp_path / "s"),
    ]) == 2


def test_fsdb_gen_with_mock_echo(tmp_path, replay_config):
    out = tmp_path / "fsdb.jsonl"
    code = main([
        "fsdb-gen",
        "--config", str(replay_config),
        "--backend", "mock",
        "--pairs-per-theme", "1",
        "--themes", "Detect",
        "--out", str(out),
    ])
    # The default mock responder returns a bare table|take query, which is
    # not in NLQ/KQL block format, so synthesis finds no valid pairs.
    assert code == 1


def test_taxonomy_histogram(tmp_path, capsys):
    diags = [
        {"severity": "syntax", "message": "Expected: ;", "category": "Expected: ;", "span": [0, 1]},
        {"severity": "syntax", "message": "Expected: ;", "category": "Expected: ;", "span": [0, 1]},
        {"severity": "syntax", "message": 'Missing: "', "category": 'Missing: "', "span": [0, 1]},
    ]
    path = tmp_path / "diags.jsonl"
    path.write_text("\n".join(json.dumps(d) for d in diags))
    assert main(["taxonomy", "--input", str(path)]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert "Expected: ;" in lines[0] and lines[0].strip().startswith("2")
    assert "total" in lines[-1]


def test_config_relative_paths_resolve_against_config_dir():
    # The committed configs use ../fixtures paths.
    from kqlforge.pipeline import load_config

    config = load_config(REPO_ROOT / "configs" / "two_stage_replay.json")
    assert Path(config.schema_path).exists()
    assert Path(config.replay_fixture_path).exists()

    nl2kql = load_config(REPO_ROOT / "configs" / "nl2kql_mock.json")
    assert nl2kql.mode == "nl2kql"
    assert nl2kql.prompt_variant == "alt1"
    assert Path(nl2kql.schema_path).exists()


def test_eval_with_committed_nl2kql_config(tmp_path):
    report_path = tmp_path / "report.json"
    code = main([
        "eval",
        "--config", str(REPO_ROOT / "configs" / "nl2kql_mock.json"),
        "--backend", "mock",
        "--out", str(report_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    # The mock echoes each gold query, which the refiner leaves untouched.
    assert report["summary"]["syntax"] == 1.0
    assert report["summary"]["semantic"] == 1.0


def test_outputs_are_atomic_no_tmp_left_behind(replay_config, tmp_path):
    report_path = tmp_path / "report.json"
    main(["eval", "--config", str(replay_config), "--backend", "replay", "--out", str(report_path)])
    leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
    assert leftovers == []
