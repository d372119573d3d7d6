"""Schema-aware semantic validation with per-stage column scope tracking."""

from __future__ import annotations

from . import ast
from .diagnostics import (
    STRING_OR_DYNAMIC_EXPECTED,
    TIMESPAN_EXPECTED,
    Diagnostic,
    infix_misuse,
    semantic_error,
    unknown_name,
)
from .parser import INFIX_ONLY_OPERATORS
from .schema import SchemaCatalog

# Operators whose left operand must be a string or dynamic column.
_STRING_OPERATORS = {
    "contains", "!contains", "has", "!has",
    "startswith", "!startswith", "endswith", "!endswith",
    "matches regex",
}
_STRING_LIST_OPERATORS = {"has_any", "has_all", "!has_any", "!has_all", "in~", "!in~"}

_DATETIME_FUNCTIONS = {"ago", "now", "startofday", "endofday", "startofweek", "startofmonth"}
_STRING_FUNCTIONS = {"tostring", "strcat", "tolower", "toupper", "trim", "substring"}


def validate_semantics(query: ast.QueryAst, schema: SchemaCatalog) -> list[Diagnostic]:
    """All semantic violations of ``query`` against ``schema``.

    An empty list means every referenced table exists, every column is in
    scope at its stage, comparison operand types are compatible, and no
    infix-only operator is used in function-call form.
    """
    diags: list[Diagnostic] = []
    _validate_query(query, schema, diags)
    return diags


def _validate_query(
    query: ast.QueryAst, schema: SchemaCatalog, diags: list[Diagnostic]
) -> dict[str, str]:
    scope = _initial_scope(query, schema, diags)
    for stage in query.stages:
        scope = _apply_stage(stage, scope, schema, diags)
    return scope


def _initial_scope(
    query: ast.QueryAst, schema: SchemaCatalog, diags: list[Diagnostic]
) -> dict[str, str]:
    scope: dict[str, str] = {}
    for table in query.head_tables:
        canonical = schema.resolve_table(table)
        if canonical is None:
            diags.append(unknown_name(table, query.span))
            continue
        for col in schema.tables[canonical]:
            scope.setdefault(col.name, col.type)
    return scope


def _apply_stage(stage, scope, schema, diags):
    if isinstance(stage, ast.WhereStage):
        _check_expr(stage.predicate, scope, diags)
        return scope
    if isinstance(stage, ast.ProjectStage):
        return _apply_projection(stage.items, scope, diags, keep_only=True)
    if isinstance(stage, ast.ExtendStage):
        return _apply_projection(stage.assignments, scope, diags, keep_only=False)
    if isinstance(stage, ast.SummarizeStage):
        return _apply_summarize(stage, scope, diags)
    if isinstance(stage, (ast.SortStage, ast.TopStage)):
        for key in stage.keys:
            _resolve_column(key.column, scope, diags)
        return scope
    if isinstance(stage, ast.TakeStage):
        return scope
    if isinstance(stage, ast.CountStage):
        return {"Count": "long"}
    if isinstance(stage, ast.DistinctStage):
        if stage.star:
            return scope
        new_scope: dict[str, str] = {}
        for col in stage.columns:
            resolved = _resolve_column(col, scope, diags)
            if resolved is not None:
                new_scope[resolved[0]] = resolved[1]
            else:
                new_scope[col.name] = "dynamic"
        return new_scope
    if isinstance(stage, ast.JoinStage):
        return _apply_join(stage, scope, schema, diags)
    if isinstance(stage, ast.UnionStage):
        merged = dict(scope)
        for table in stage.tables:
            canonical = schema.resolve_table(table)
            if canonical is None:
                diags.append(unknown_name(table, stage.span))
                continue
            for col in schema.tables[canonical]:
                merged.setdefault(col.name, col.type)
        return merged
    raise TypeError(f"unknown stage {stage!r}")


def _apply_projection(items, scope, diags, keep_only: bool):
    new_scope = {} if keep_only else dict(scope)
    for item in items:
        if item.expr is None:
            resolved = _resolve_column(ast.ColumnRef(item.name, item.span), scope, diags)
            if resolved is not None:
                new_scope[resolved[0]] = resolved[1]
            else:
                new_scope[item.name] = "dynamic"
        else:
            _check_expr(item.expr, scope, diags)
            new_scope[item.name] = _expr_type(item.expr, scope) or "dynamic"
    return new_scope


def _apply_summarize(stage: ast.SummarizeStage, scope, diags):
    new_scope: dict[str, str] = {}
    for col in stage.by:
        resolved = _resolve_column(col, scope, diags)
        if resolved is not None:
            new_scope[resolved[0]] = resolved[1]
        else:
            new_scope[col.name] = "dynamic"
    for agg in stage.aggregates:
        for arg in agg.args:
            _check_expr(arg, scope, diags)
        for name, col_type in _aggregate_outputs(agg, scope):
            new_scope.setdefault(name, col_type)
    return new_scope


def _aggregate_outputs(agg: ast.AggregateSpec, scope) -> list[tuple[str, str]]:
    """Columns an aggregate contributes to the summarize output scope.

    arg_max/arg_min return the argument columns themselves; other
    aggregates produce one column, named by the alias when given and by
    the <fn>_<col> convention otherwise.
    """
    func = agg.func.lower()
    if agg.alias is not None:
        return [(agg.alias, "long" if func.startswith("count") else "dynamic")]
    if func in ("arg_max", "arg_min"):
        outputs = []
        for arg in agg.args:
            if isinstance(arg, ast.ColumnRef):
                resolved = _lookup(scope, arg.name)
                if resolved is not None:
                    outputs.append(resolved)
                else:
                    outputs.append((arg.name, "dynamic"))
            elif isinstance(arg, ast.Star):
                outputs.extend(scope.items())
        return outputs
    first_col = next((a.name for a in agg.args if isinstance(a, ast.ColumnRef)), None)
    name = f"{agg.func}_{first_col}" if first_col else f"{agg.func}_"
    return [(name, "long" if func.startswith("count") else "dynamic")]


def _apply_join(stage: ast.JoinStage, scope, schema, diags):
    right_scope = _validate_query(stage.right, schema, diags)
    for cond in stage.on:
        if cond.qualified:
            _require_in_scope(cond.left, scope, stage.span, diags)
            _require_in_scope(cond.right, right_scope, stage.span, diags)
        else:
            _require_in_scope(cond.left, scope, cond.span, diags)
            _require_in_scope(cond.left, right_scope, cond.span, diags)
    merged = dict(scope)
    for name, col_type in right_scope.items():
        merged.setdefault(name, col_type)
    return merged


def _require_in_scope(name, scope, span, diags):
    if _lookup(scope, name) is None:
        diags.append(unknown_name(name, span))


def _lookup(scope: dict[str, str], name: str) -> tuple[str, str] | None:
    if name in scope:
        return name, scope[name]
    lowered = name.lower()
    for canonical, col_type in scope.items():
        if canonical.lower() == lowered:
            return canonical, col_type
    return None


def _resolve_column(col: ast.ColumnRef, scope, diags) -> tuple[str, str] | None:
    resolved = _lookup(scope, col.name)
    if resolved is None:
        diags.append(unknown_name(col.name, col.span))
    return resolved


# --------------------------------------------------------------------------
# Expression checking


def _check_expr(expr, scope, diags) -> None:
    if isinstance(expr, ast.ColumnRef):
        _resolve_column(expr, scope, diags)
        return
    if isinstance(expr, (ast.Literal, ast.Star)):
        return
    if isinstance(expr, ast.FuncCall):
        if expr.name in INFIX_ONLY_OPERATORS:
            diags.append(infix_misuse(expr.name, expr.span))
        for arg in expr.args:
            _check_expr(arg, scope, diags)
        if expr.name == "ago":
            _check_ago(expr, scope, diags)
        return
    if isinstance(expr, ast.UnaryOp):
        _check_expr(expr.operand, scope, diags)
        return
    if isinstance(expr, ast.BinaryOp):
        _check_expr(expr.left, scope, diags)
        _check_expr(expr.right, scope, diags)
        return
    if isinstance(expr, ast.Comparison):
        _check_expr(expr.left, scope, diags)
        _check_expr(expr.right, scope, diags)
        if expr.op in _STRING_OPERATORS:
            _require_stringlike(expr.left, scope, diags)
        return
    if isinstance(expr, ast.BetweenPredicate):
        _check_expr(expr.operand, scope, diags)
        _check_expr(expr.low, scope, diags)
        _check_expr(expr.high, scope, diags)
        return
    if isinstance(expr, ast.ListPredicate):
        _check_expr(expr.operand, scope, diags)
        for item in expr.items:
            _check_expr(item, scope, diags)
        if expr.op in _STRING_LIST_OPERATORS:
            _require_stringlike(expr.operand, scope, diags)
        return
    if isinstance(expr, ast.BoolOp):
        for operand in expr.operands:
            _check_expr(operand, scope, diags)
        return
    if isinstance(expr, ast.NotExpr):
        _check_expr(expr.operand, scope, diags)
        return
    raise TypeError(f"unknown expression {expr!r}")


def _check_ago(call: ast.FuncCall, scope, diags) -> None:
    if len(call.args) != 1:
        diags.append(semantic_error(TIMESPAN_EXPECTED, call.span))
        return
    arg_type = _expr_type(call.args[0], scope)
    if arg_type is not None and arg_type != "timespan":
        diags.append(semantic_error(TIMESPAN_EXPECTED, call.span))


def _require_stringlike(operand, scope, diags) -> None:
    if not isinstance(operand, ast.ColumnRef):
        return
    resolved = _lookup(scope, operand.name)
    if resolved is None:
        return  # already reported as an unknown name
    if resolved[1] not in ("string", "dynamic"):
        diags.append(semantic_error(STRING_OR_DYNAMIC_EXPECTED, operand.span))


def _expr_type(expr, scope) -> str | None:
    if isinstance(expr, ast.Literal):
        return {
            "string": "string",
            "timespan": "timespan",
            "datetime": "datetime",
            "bool": "bool",
        }.get(expr.kind, "real" if "." in expr.value else "long")
    if isinstance(expr, ast.ColumnRef):
        resolved = _lookup(scope, expr.name)
        return resolved[1] if resolved else None
    if isinstance(expr, ast.FuncCall):
        if expr.name in _DATETIME_FUNCTIONS:
            return "datetime"
        if expr.name in _STRING_FUNCTIONS:
            return "string"
        return None
    if isinstance(expr, ast.UnaryOp):
        return _expr_type(expr.operand, scope)
    if isinstance(expr, ast.BinaryOp):
        left = _expr_type(expr.left, scope)
        right = _expr_type(expr.right, scope)
        if "datetime" in (left, right):
            return "datetime"
        return left or right
    return None
