"""ruletag: keyword-in-context rule tagging and weak-supervision text
classification pipeline.

Workflow: ingest a text corpus, extract keyword context windows, explore
n-grams, write priority-ordered context rules, extrapolate them into a
training set, train shallow TF-IDF classifiers, classify the full corpus
behind a keyword gate, and aggregate chunk predictions into document- and
record-level tag tables with yearly prevalence series.
"""

from .corpus import CleaningProfile, CorpusManifest, Document, MetadataTable, clean, ingest
from .dataset import (
    TagTable,
    aggregate,
    classify_chunk,
    classify_corpus,
    load_store,
    prevalence_series,
    record_metrics,
    store,
)
from .extraction import Chunk, KeywordConfig, document_chunks, extract_corpus, sample_extract
from .extrapolation import (
    TrainingSet,
    cohens_kappa,
    extrapolate,
    make_validation_sample,
    score_validation,
)
from .kernels import BACKEND
from .learning import (
    ClassifierModel,
    MetricsReport,
    ModelRegistry,
    Vectorizer,
    evaluate,
    grid_search,
    load_model,
    purify,
    save_model,
    train,
)
from .ngrams import ngram_explore
from .pipeline import ProjectConfig, run_pipeline
from .provenance import TOOL_VERSION
from .rules import Rule, RuleSet, apply_rules, load_ruleset

__version__ = TOOL_VERSION

__all__ = [
    "BACKEND",
    "Chunk",
    "ClassifierModel",
    "CleaningProfile",
    "CorpusManifest",
    "Document",
    "KeywordConfig",
    "MetadataTable",
    "MetricsReport",
    "ModelRegistry",
    "ProjectConfig",
    "Rule",
    "RuleSet",
    "TagTable",
    "TrainingSet",
    "Vectorizer",
    "aggregate",
    "apply_rules",
    "classify_chunk",
    "classify_corpus",
    "clean",
    "cohens_kappa",
    "document_chunks",
    "evaluate",
    "extract_corpus",
    "extrapolate",
    "grid_search",
    "ingest",
    "load_model",
    "load_ruleset",
    "load_store",
    "make_validation_sample",
    "ngram_explore",
    "prevalence_series",
    "purify",
    "record_metrics",
    "run_pipeline",
    "sample_extract",
    "save_model",
    "score_validation",
    "store",
    "train",
]
