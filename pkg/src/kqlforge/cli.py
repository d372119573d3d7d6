"""Command-line interface.

Subcommands: build-catalog, fsdb-gen, translate, eval, sweep, taxonomy.
Exit codes: 0 on full success, 2 for configuration/usage errors, 1 for
anything else (including per-item hard failures).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .errors import ConfigurationError, KqlForgeError, UnrecordedRequestError
from .evaluation import evaluate_dataset, run_sweep
from .gateway import LiveBackend, MockBackend, PriceTable, ReplayBackend
from .kql import SchemaCatalog, classify_diagnostics
from .kql.diagnostics import Diagnostic
from .pipeline import (
    Backends,
    PipelineConfig,
    Stores,
    build_embedder,
    load_config,
    load_dataset,
    synthesize_fsdb,
    translate,
)
from .prompts import SYNTHESIS_THEMES
from .retrieval import build_example_store, build_table_store, build_value_store


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory plus rename, so a killed
    run never leaves truncated output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except UnrecordedRequestError as exc:
        print(f"replay miss: {exc}", file=sys.stderr)
        return 1
    except (KqlForgeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kqlforge")
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    p = sub.add_parser("build-catalog", help="build embedding store files from a schema")
    p.add_argument("--schema", required=True)
    p.add_argument("--fsdb", help="optional JSONL of few-shot examples to embed")
    p.add_argument("--out", default=".", help="output directory for the .ejsonl files")
    p.set_defaults(handler=_cmd_build_catalog)

    p = sub.add_parser("fsdb-gen", help="synthesize and validate NLQ-KQL pairs")
    _common_flags(p)
    p.add_argument("--pairs-per-theme", type=int, default=5)
    p.add_argument("--with-rationale", action="store_true")
    p.add_argument("--themes", default=",".join(SYNTHESIS_THEMES))
    p.set_defaults(handler=_cmd_fsdb_gen)

    p = sub.add_parser("translate", help="translate one NLQ to KQL")
    _common_flags(p)
    p.add_argument("--nlq", required=True)
    p.set_defaults(handler=_cmd_translate)

    p = sub.add_parser("eval", help="evaluate a dataset and write a report")
    _common_flags(p)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("sweep", help="run a knob grid and write one report per point")
    _common_flags(p)
    p.add_argument(
        "--knob",
        action="append",
        default=[],
        metavar="NAME=V1,V2,...",
        help="repeatable; e.g. --knob t=1,3,5,7,9",
    )
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("taxonomy", help="histogram a diagnostics JSONL file")
    p.add_argument("--input", required=True)
    p.add_argument("--by", choices=["category", "message"], default="category")
    p.set_defaults(handler=_cmd_taxonomy)
    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="pipeline config file (JSON or TOML)")
    p.add_argument("--backend", choices=["live", "replay", "mock"], default="mock")
    p.add_argument("--dataset")
    p.add_argument("--mode", choices=["zero_shot", "nl2kql", "two_stage"])
    p.add_argument("--prompt-variant", choices=["original", "alt1", "alt2"])
    p.add_argument("--t", type=int)
    p.add_argument("--f", type=int)
    p.add_argument("--n-candidates", type=int)
    p.add_argument("--temperature", type=float)
    p.add_argument("--oracle", choices=["general", "schema"])
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--fixture", help="replay fixture path (overrides the config)")
    p.add_argument("--out", help="output file or directory")


def _load_config(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    return config.with_overrides(
        mode=args.mode,
        prompt_variant=args.prompt_variant,
        t=args.t,
        f=args.f,
        n_candidates=args.n_candidates,
        generator_temperature=args.temperature,
        oracle_mode=args.oracle,
        workers=args.workers,
        seed=args.seed,
        iterations=args.iterations,
        dataset_path=args.dataset,
        replay_fixture_path=args.fixture,
    )


def _load_environment(config: PipelineConfig):
    schema = SchemaCatalog.load(config.schema_path) if config.schema_path else SchemaCatalog()
    stores = Stores.load(config)
    prices = PriceTable.load(config.price_table_path) if config.price_table_path else PriceTable()
    return schema, stores, prices


def _build_backend(args, config: PipelineConfig, schema: SchemaCatalog, dataset: list[dict] | None):
    if args.backend == "replay":
        if not config.replay_fixture_path:
            raise ConfigurationError("replay backend needs --fixture or replay_fixture_path")
        return ReplayBackend(config.replay_fixture_path)
    if args.backend == "live":
        endpoint = os.environ.get("KQLFORGE_ENDPOINT") or config.endpoint
        if not endpoint:
            raise ConfigurationError(
                "live backend needs an endpoint (config `endpoint` or KQLFORGE_ENDPOINT)"
            )
        return LiveBackend(endpoint, api_key=os.environ.get("KQLFORGE_API_KEY"))
    tables = schema.table_names()
    fallback = f"{tables[0]}\n| take 10" if tables else "T | take 10"
    if dataset:
        ordered = sorted(dataset, key=lambda p: len(p["nlq"]), reverse=True)

        def responder(request):
            for pair in ordered:
                if pair["nlq"] in request.prompt:
                    return pair["kql"]
            return fallback

        return MockBackend(responder)
    return MockBackend(lambda request: fallback)


def _backends(args, config, schema, dataset) -> Backends:
    backend = _build_backend(args, config, schema, dataset)
    return Backends(generator=backend, oracle=backend, teacher=backend)


def _workers(config: PipelineConfig) -> int:
    if config.workers and config.workers > 0:
        return config.workers
    return os.cpu_count() or 1


# -- subcommand handlers ------------------------------------------------------


def _cmd_build_catalog(args) -> int:
    schema = SchemaCatalog.load(args.schema)
    embedder = build_embedder(PipelineConfig())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, store in (
        ("tables", build_table_store(schema, embedder)),
        ("values", build_value_store(schema, embedder)),
        (
            "fsdb",
            build_example_store(load_dataset(args.fsdb), embedder)
            if args.fsdb
            else build_example_store([], embedder),
        ),
    ):
        tmp = out / f"{name}.ejsonl"
        lines = [json.dumps(e.to_json_dict(), sort_keys=True) for e in store.entries]
        write_atomic(tmp, "\n".join(lines) + ("\n" if lines else ""))
        print(f"wrote {tmp} ({len(store)} entries)")
    return 0


def _cmd_fsdb_gen(args) -> int:
    config = _load_config(args)
    schema, _stores, _prices = _load_environment(config)
    backend = _build_backend(args, config, schema, None)
    themes = tuple(t.strip() for t in args.themes.split(",") if t.strip())
    result = synthesize_fsdb(
        schema,
        backend,
        config.teacher_model,
        themes=themes,
        pairs_per_theme=args.pairs_per_theme,
        with_rationale=args.with_rationale,
    )
    out = Path(args.out or "fsdb.jsonl")
    write_atomic(out, _jsonl(result.kept))
    discards = out.with_suffix(".discards.jsonl")
    write_atomic(discards, _jsonl(result.discarded))
    print(f"kept {len(result.kept)} pairs -> {out}; discarded {len(result.discarded)} -> {discards}")
    return 0


def _cmd_translate(args) -> int:
    config = _load_config(args)
    schema, stores, _prices = _load_environment(config)
    dataset = load_dataset(config.dataset_path) if config.dataset_path else None
    backends = _backends(args, config, schema, dataset)
    final, trace = translate(args.nlq, config, stores, schema, backends)
    print(final)
    out = Path(args.out or "trace.json")
    write_atomic(out, json.dumps(trace.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_eval(args) -> int:
    config = _load_config(args)
    if not config.dataset_path:
        raise ConfigurationError("eval needs --dataset or dataset_path in the config")
    schema, stores, prices = _load_environment(config)
    dataset = load_dataset(config.dataset_path)
    backends = _backends(args, config, schema, dataset)
    report = evaluate_dataset(
        dataset, config, stores, schema, backends,
        prices=prices, workers=_workers(config),
    )
    out = Path(args.out or "report.json")
    write_atomic(out, report.to_json())
    write_atomic(out.with_suffix(".txt"), report.to_text_table())
    print(report.to_text_table(), end="")
    print(f"report -> {out}")
    return 0 if report.summary.get("failures", 0) == 0 else 1


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    if not config.dataset_path:
        raise ConfigurationError("sweep needs --dataset or dataset_path in the config")
    if not args.knob:
        raise ConfigurationError("sweep needs at least one --knob")
    grid = {}
    for spec in args.knob:
        name, _, values = spec.partition("=")
        if not values:
            raise ConfigurationError(f"bad --knob spec {spec!r}")
        grid[name.strip()] = [_knob_value(v) for v in values.split(",")]
    schema, stores, prices = _load_environment(config)
    dataset = load_dataset(config.dataset_path)
    backends = _backends(args, config, schema, dataset)
    try:
        points = run_sweep(
            grid, config, dataset, stores, schema, backends,
            prices=prices, workers=_workers(config),
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    out = Path(args.out or "sweep")
    out.mkdir(parents=True, exist_ok=True)
    index = []
    hard_failure = False
    for i, point in enumerate(points):
        name = f"point_{i:03d}.json"
        entry = {"tag": point.tag, "params": point.params, "file": name}
        if point.report is not None:
            write_atomic(out / name, point.report.to_json())
            entry["summary"] = point.report.summary
            if point.report.summary.get("failures", 0):
                hard_failure = True
        else:
            entry["error"] = point.error
            hard_failure = True
        index.append(entry)
    write_atomic(out / "index.json", json.dumps(index, indent=2, sort_keys=True) + "\n")
    print(f"{len(points)} reports -> {out}")
    return 0 if not hard_failure else 1


def _cmd_taxonomy(args) -> int:
    diags = []
    with open(args.input, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                diags.append(Diagnostic.from_json_dict(json.loads(line)))
    if args.by == "message":
        counts: dict[str, int] = {}
        for diag in diags:
            counts[diag.message] = counts.get(diag.message, 0) + 1
    else:
        counts = classify_diagnostics(diags)
    total = sum(counts.values())
    for key, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        share = 100.0 * count / total if total else 0.0
        print(f"{count:6d}  {share:5.1f}%  {key}")
    print(f"{total:6d}  total")
    return 0


def _knob_value(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _jsonl(records: list[dict]) -> str:
    lines = [json.dumps(r, sort_keys=True) for r in records]
    return "\n".join(lines) + ("\n" if lines else "")


if __name__ == "__main__":
    sys.exit(main())
