"""AST node types for parsed KQL queries, with canonical printing."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

_NO_SPAN = (0, 0)


# --------------------------------------------------------------------------
# Scalar expressions


@dataclass(frozen=True)
class ColumnRef:
    name: str
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class Star:
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class Literal:
    kind: str  # string | number | timespan | datetime | bool
    value: str  # normalized text form
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple = ()
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: object = None
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: object = None
    right: object = None
    span: tuple[int, int] = _NO_SPAN


# --------------------------------------------------------------------------
# Predicates and boolean structure


@dataclass(frozen=True)
class Comparison:
    op: str  # == != < <= > >= =~ !~ contains has startswith ... "matches regex"
    left: object = None
    right: object = None
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class BetweenPredicate:
    operand: object
    low: object
    high: object
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class ListPredicate:
    op: str  # in | in~ | !in | !in~ | has_any | has_all | !has_any | !has_all
    operand: object = None
    items: tuple = ()
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class BoolOp:
    op: str  # and | or
    operands: tuple = ()
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class NotExpr:
    operand: object = None
    span: tuple[int, int] = _NO_SPAN


# --------------------------------------------------------------------------
# Pipeline stages


@dataclass(frozen=True)
class ProjectItem:
    name: str
    expr: object = None  # None for a plain column reference
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class AggregateSpec:
    func: str
    args: tuple = ()
    alias: str | None = None
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class SortKey:
    column: ColumnRef
    ascending: bool | None = None
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class WhereStage:
    predicate: object
    span: tuple[int, int] = _NO_SPAN
    kind = "where"


@dataclass(frozen=True)
class ProjectStage:
    items: tuple = ()
    span: tuple[int, int] = _NO_SPAN
    kind = "project"


@dataclass(frozen=True)
class ExtendStage:
    assignments: tuple = ()  # of ProjectItem with expr set
    span: tuple[int, int] = _NO_SPAN
    kind = "extend"


@dataclass(frozen=True)
class SummarizeStage:
    aggregates: tuple = ()
    by: tuple = ()  # of ColumnRef
    span: tuple[int, int] = _NO_SPAN
    kind = "summarize"


@dataclass(frozen=True)
class SortStage:
    keys: tuple = ()
    span: tuple[int, int] = _NO_SPAN
    kind = "sort"


@dataclass(frozen=True)
class TopStage:
    count: int = 0
    keys: tuple = ()
    span: tuple[int, int] = _NO_SPAN
    kind = "top"


@dataclass(frozen=True)
class TakeStage:
    count: int = 0
    span: tuple[int, int] = _NO_SPAN
    kind = "take"


@dataclass(frozen=True)
class CountStage:
    span: tuple[int, int] = _NO_SPAN
    kind = "count"


@dataclass(frozen=True)
class DistinctStage:
    columns: tuple = ()  # of ColumnRef; empty tuple means "distinct *"
    star: bool = False
    span: tuple[int, int] = _NO_SPAN
    kind = "distinct"


@dataclass(frozen=True)
class JoinCondition:
    left: str
    right: str
    qualified: bool = False  # True for $left.X == $right.Y form
    span: tuple[int, int] = _NO_SPAN


@dataclass(frozen=True)
class JoinStage:
    right: "QueryAst" = None
    on: tuple = ()
    join_kind: str = "inner"
    span: tuple[int, int] = _NO_SPAN
    kind = "join"


@dataclass(frozen=True)
class UnionStage:
    tables: tuple = ()  # of str
    span: tuple[int, int] = _NO_SPAN
    kind = "union"


@dataclass(frozen=True)
class QueryAst:
    """A parsed pipeline query: all referenced source tables plus stages.

    ``sources`` lists every table the query reads from, in reference
    order: the leading table(s) first, then tables introduced by join or
    union stages (recursively). It has more than one entry only when a
    join or union is present.
    """

    sources: tuple = ()
    stages: tuple = ()
    raw: str = ""
    head_tables: tuple = ()  # the leading source table(s) only
    span: tuple[int, int] = _NO_SPAN

    def to_text(self) -> str:
        """Canonical pretty-print; re-parsing it reproduces the structure."""
        parts = [", ".join(self.head_tables) if len(self.head_tables) > 1 else self.head_tables[0]]
        if len(self.head_tables) > 1:
            parts[0] = "union " + parts[0]
        for stage in self.stages:
            parts.append("| " + _stage_text(stage))
        return "\n".join(parts)


def _stage_text(stage) -> str:
    if isinstance(stage, WhereStage):
        return "where " + expr_text(stage.predicate)
    if isinstance(stage, ProjectStage):
        return "project " + ", ".join(_project_item_text(i) for i in stage.items)
    if isinstance(stage, ExtendStage):
        return "extend " + ", ".join(_project_item_text(i) for i in stage.assignments)
    if isinstance(stage, SummarizeStage):
        parts = ["summarize"]
        if stage.aggregates:
            parts.append(", ".join(_aggregate_text(a) for a in stage.aggregates))
        if stage.by:
            parts.append("by " + ", ".join(c.name for c in stage.by))
        return " ".join(parts)
    if isinstance(stage, SortStage):
        return "sort by " + ", ".join(_sort_key_text(k) for k in stage.keys)
    if isinstance(stage, TopStage):
        return f"top {stage.count} by " + ", ".join(_sort_key_text(k) for k in stage.keys)
    if isinstance(stage, TakeStage):
        return f"take {stage.count}"
    if isinstance(stage, CountStage):
        return "count"
    if isinstance(stage, DistinctStage):
        if stage.star:
            return "distinct *"
        return "distinct " + ", ".join(c.name for c in stage.columns)
    if isinstance(stage, JoinStage):
        sub = stage.right.to_text().replace("\n", " ")
        conditions = ", ".join(_join_condition_text(c) for c in stage.on)
        return f"join kind={stage.join_kind} ({sub}) on {conditions}"
    if isinstance(stage, UnionStage):
        return "union " + ", ".join(stage.tables)
    raise TypeError(f"unknown stage {stage!r}")


def _project_item_text(item: ProjectItem) -> str:
    if item.expr is None:
        return item.name
    return f"{item.name} = {expr_text(item.expr)}"


def _aggregate_text(agg: AggregateSpec) -> str:
    call = f"{agg.func}({', '.join(expr_text(a) for a in agg.args)})"
    if agg.alias is not None:
        return f"{agg.alias} = {call}"
    return call


def _sort_key_text(key: SortKey) -> str:
    if key.ascending is None:
        return key.column.name
    return f"{key.column.name} {'asc' if key.ascending else 'desc'}"


def _join_condition_text(cond: JoinCondition) -> str:
    if cond.qualified:
        return f"$left.{cond.left} == $right.{cond.right}"
    return cond.left


def expr_text(expr) -> str:
    """Canonical text for a scalar or boolean expression."""
    if isinstance(expr, ColumnRef):
        return expr.name
    if isinstance(expr, Star):
        return "*"
    if isinstance(expr, Literal):
        if expr.kind == "string":
            escaped = expr.value.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        if expr.kind == "datetime":
            return f"datetime({expr.value})"
        return expr.value
    if isinstance(expr, FuncCall):
        return f"{expr.name}({', '.join(expr_text(a) for a in expr.args)})"
    if isinstance(expr, UnaryOp):
        return f"{expr.op}{expr_text(expr.operand)}"
    if isinstance(expr, BinaryOp):
        return f"{expr_text(expr.left)} {expr.op} {expr_text(expr.right)}"
    if isinstance(expr, Comparison):
        return f"{expr_text(expr.left)} {expr.op} {expr_text(expr.right)}"
    if isinstance(expr, BetweenPredicate):
        return (
            f"{expr_text(expr.operand)} between "
            f"({expr_text(expr.low)} .. {expr_text(expr.high)})"
        )
    if isinstance(expr, ListPredicate):
        items = ", ".join(expr_text(i) for i in expr.items)
        return f"{expr_text(expr.operand)} {expr.op} ({items})"
    if isinstance(expr, BoolOp):
        return f" {expr.op} ".join(_maybe_paren(o) for o in expr.operands)
    if isinstance(expr, NotExpr):
        return f"not({expr_text(expr.operand)})"
    raise TypeError(f"unknown expression {expr!r}")


def _maybe_paren(expr) -> str:
    if isinstance(expr, BoolOp):
        return f"({expr_text(expr)})"
    return expr_text(expr)


_IGNORED_FIELDS = {"span", "raw"}


def structure(node):
    """Nested-tuple form of a node ignoring spans and raw text.

    Two parses are structurally equal iff their structures are equal.
    """
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        items = tuple(
            structure(getattr(node, f.name))
            for f in dataclasses.fields(node)
            if f.name not in _IGNORED_FIELDS
        )
        return (type(node).__name__,) + items
    if isinstance(node, tuple):
        return tuple(structure(item) for item in node)
    return node


def walk(node):
    """Yield every AST dataclass node reachable from ``node``."""
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        yield node
        for f in dataclasses.fields(node):
            yield from walk(getattr(node, f.name))
    elif isinstance(node, tuple):
        for item in node:
            yield from walk(item)
