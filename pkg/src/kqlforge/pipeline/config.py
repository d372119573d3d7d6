"""Pipeline configuration: knobs, model roles, and file locations."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..errors import ConfigurationError

MODES = ("zero_shot", "nl2kql", "two_stage")
PROMPT_VARIANTS = ("original", "alt1", "alt2")
ORACLE_MODES = ("general", "schema")


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "two_stage"
    prompt_variant: str = "original"
    t: int | None = None  # top tables; defaults to 9 (nl2kql) / 5 (two_stage)
    v: int = 5  # top values per table
    include_values: bool | None = None  # defaults on for nl2kql, off for two_stage
    f: int = 2  # few-shot examples
    n_candidates: int = 1
    generator_temperature: float = 1.0
    oracle_temperature: float = 0.0
    oracle_mode: str = "schema"
    identifier_repair_threshold: float = 0.9
    generator_model: str = "deepseek-coder-6.7b-instruct"
    oracle_model: str = "gemini-2.0-flash"
    teacher_model: str = "gemini-2.0-flash"
    embedder: str = "offline"  # "offline", or a live embedding model id
    embedder_endpoint: str | None = None
    embedder_dims: int = 256
    embedder_max_in_flight: int = 4
    embedder_max_attempts: int = 3
    max_output_tokens: int = 1024
    workers: int = 0  # 0 means "use the CPU count"
    seed: int = 0
    iterations: int = 1
    case_sensitive_literals: bool = True
    endpoint: str | None = None  # live chat-completion endpoint; key via env
    price_table_path: str | None = None
    schema_path: str | None = None
    dataset_path: str | None = None
    tables_store_path: str | None = None
    values_store_path: str | None = None
    fsdb_store_path: str | None = None
    replay_fixture_path: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.prompt_variant not in PROMPT_VARIANTS:
            raise ConfigurationError(f"unknown prompt variant {self.prompt_variant!r}")
        if self.oracle_mode not in ORACLE_MODES:
            raise ConfigurationError(f"unknown oracle mode {self.oracle_mode!r}")
        if self.t is not None and self.t < 1:
            raise ConfigurationError("t must be >= 1")
        if self.n_candidates < 1:
            raise ConfigurationError("n_candidates must be >= 1")
        if not 0.0 <= self.identifier_repair_threshold <= 1.0:
            raise ConfigurationError("identifier_repair_threshold must be in [0, 1]")
        if self.f < 1:
            raise ConfigurationError("f must be >= 1")

    @property
    def top_tables(self) -> int:
        if self.t is not None:
            return self.t
        return 5 if self.mode == "two_stage" else 9

    @property
    def values_included(self) -> bool:
        if self.include_values is not None:
            return self.include_values
        return self.mode != "two_stage"

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def to_json_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["resolved_t"] = self.top_tables
        data["resolved_include_values"] = self.values_included
        return data


_PATH_FIELDS = (
    "price_table_path",
    "schema_path",
    "dataset_path",
    "tables_store_path",
    "values_store_path",
    "fsdb_store_path",
    "replay_fixture_path",
)


def load_config(path: str | Path) -> PipelineConfig:
    """Load a config file (JSON or TOML). Relative paths inside the file
    are resolved against the file's own directory."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} does not exist")
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    else:
        raw = json.loads(path.read_text(encoding="utf-8"))
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    for name in _PATH_FIELDS:
        value = raw.get(name)
        if value and not Path(value).is_absolute():
            raw[name] = str((path.parent / value).resolve())
    return PipelineConfig(**raw)
