"""Schema catalog: tables, typed columns, and sampled column values."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

SCALAR_TYPES = {"string", "datetime", "timespan", "int", "long", "real", "bool", "dynamic"}


@dataclass(frozen=True)
class Column:
    name: str
    type: str


@dataclass
class SchemaCatalog:
    """Tables mapped to ordered typed columns, plus sampled literal values.

    Name lookups are case-sensitive against the canonical names, with a
    case-insensitive fallback that resolves to the canonical casing.
    """

    tables: dict[str, list[Column]] = field(default_factory=dict)
    values: dict[tuple[str, str], list[str]] = field(default_factory=dict)

    def add_table(self, name: str, columns: list[tuple[str, str]]) -> None:
        if name in self.tables:
            raise ValueError(f"duplicate table {name!r}")
        cols = []
        seen = set()
        for col_name, col_type in columns:
            if col_name in seen:
                raise ValueError(f"duplicate column {col_name!r} in table {name!r}")
            if col_type not in SCALAR_TYPES:
                raise ValueError(f"unknown scalar type {col_type!r} for {name}.{col_name}")
            seen.add(col_name)
            cols.append(Column(col_name, col_type))
        self.tables[name] = cols

    def resolve_table(self, name: str) -> str | None:
        """Canonical table name for ``name``, or None if unknown."""
        if name in self.tables:
            return name
        lowered = name.lower()
        matches = [t for t in self.tables if t.lower() == lowered]
        return matches[0] if matches else None

    def columns_of(self, table: str) -> list[Column]:
        canonical = self.resolve_table(table)
        if canonical is None:
            raise KeyError(table)
        return list(self.tables[canonical])

    def table_names(self) -> list[str]:
        return list(self.tables)

    def all_names(self) -> list[str]:
        """Every table and column name, tables first, deduplicated in order."""
        names: list[str] = []
        seen: set[str] = set()
        for table, cols in self.tables.items():
            if table not in seen:
                seen.add(table)
                names.append(table)
            for col in cols:
                if col.name not in seen:
                    seen.add(col.name)
                    names.append(col.name)
        return names

    def sampled_values(self, table: str, column: str) -> list[str]:
        return list(self.values.get((table, column), []))

    def to_json_dict(self) -> dict:
        return {
            "tables": {
                name: {"columns": [{"name": c.name, "type": c.type} for c in cols]}
                for name, cols in self.tables.items()
            },
            "values": {
                f"{table}.{column}": vals
                for (table, column), vals in self.values.items()
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SchemaCatalog":
        catalog = cls()
        for name, spec in data.get("tables", {}).items():
            catalog.add_table(
                name, [(c["name"], c["type"]) for c in spec.get("columns", [])]
            )
        for key, vals in data.get("values", {}).items():
            table, _, column = key.partition(".")
            if not column:
                raise ValueError(f"value key {key!r} is not of the form table.column")
            catalog.values[(table, column)] = [str(v) for v in vals]
        return catalog

    @classmethod
    def load(cls, path: str | Path) -> "SchemaCatalog":
        with open(path, encoding="utf-8") as handle:
            return cls.from_json_dict(json.load(handle))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
