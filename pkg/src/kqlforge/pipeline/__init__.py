"""Pipeline orchestration: translation modes, query repair, and synthesis."""

from .config import PipelineConfig, load_config
from .refiner import Repair, nearest_schema_name, query_refine
from .synthesis import (
    SynthesisResult,
    load_dataset,
    parse_synthesis_reply,
    save_dataset,
    slice_of_schema,
    split_dataset,
    synthesize_fsdb,
)
from .translate import Backends, Stores, TranslationTrace, build_embedder, translate

__all__ = [
    "Backends",
    "PipelineConfig",
    "Repair",
    "Stores",
    "SynthesisResult",
    "TranslationTrace",
    "build_embedder",
    "load_config",
    "load_dataset",
    "nearest_schema_name",
    "parse_synthesis_reply",
    "query_refine",
    "save_dataset",
    "slice_of_schema",
    "split_dataset",
    "synthesize_fsdb",
    "translate",
]
