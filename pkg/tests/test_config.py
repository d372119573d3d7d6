from __future__ import annotations

import pytest

from kqlforge.errors import ConfigurationError
from kqlforge.pipeline import PipelineConfig, load_config


def test_mode_sensitive_defaults():
    two_stage = PipelineConfig(mode="two_stage")
    assert two_stage.top_tables == 5
    assert not two_stage.values_included
    nl2kql = PipelineConfig(mode="nl2kql")
    assert nl2kql.top_tables == 9
    assert nl2kql.values_included


def test_explicit_values_win_over_defaults():
    config = PipelineConfig(mode="two_stage", t=7, include_values=True)
    assert config.top_tables == 7
    assert config.values_included


def test_paper_default_knobs():
    config = PipelineConfig()
    assert config.mode == "two_stage"
    assert config.f == 2
    assert config.n_candidates == 1
    assert config.generator_temperature == 1.0
    assert config.oracle_mode == "schema"
    assert config.identifier_repair_threshold == 0.9


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mode": "banana"},
        {"t": 0},
        {"n_candidates": 0},
        {"identifier_repair_threshold": 1.5},
        {"oracle_mode": "psychic"},
        {"prompt_variant": "alt9"},
    ],
)
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        PipelineConfig(**kwargs)


def test_toml_config_with_relative_paths(tmp_path):
    (tmp_path / "schema.json").write_text('{"tables": {}, "values": {}}')
    config_file = tmp_path / "pipeline.toml"
    config_file.write_text(
        'mode = "nl2kql"\n'
        "t = 3\n"
        'schema_path = "schema.json"\n'
        "generator_temperature = 0.2\n"
    )
    config = load_config(config_file)
    assert config.mode == "nl2kql"
    assert config.t == 3
    assert config.generator_temperature == 0.2
    assert config.schema_path == str((tmp_path / "schema.json").resolve())


def test_unknown_config_keys_rejected(tmp_path):
    config_file = tmp_path / "bad.json"
    config_file.write_text('{"modee": "two_stage"}')
    with pytest.raises(ConfigurationError):
        load_config(config_file)


def test_with_overrides_ignores_none():
    config = PipelineConfig(t=5)
    same = config.with_overrides(t=None, mode=None)
    assert same.t == 5 and same.mode == config.mode
    changed = config.with_overrides(t=3)
    assert changed.t == 3
