"""Smoking-status phenotyping from clinical notes.

Thin wrapper over the compiled ``_core`` extension.
"""

import json

from ._core import (
    Corpus,
    DataError,
    EmbeddingSet,
    KnnModel,
    Lexicon,
    Model,
    Note,
    NumericError,
    PcaModel,
    PhenonoteError,
    SvmModel,
    UsageError,
    Vocabulary,
    build_vocabulary,
    class_indices,
    featurize,
    fit_pca,
    fit_svm,
    load_lexicon,
    load_model,
    make_lexicon,
    micro_f1,
    normalize_text,
    prepare_corpus,
    read_corpus,
    read_embeddings,
    scan_terms,
    synthesize_embeddings,
    write_embeddings,
)
from ._core import run_pipeline as _run_pipeline

__all__ = [
    "Corpus",
    "DataError",
    "EmbeddingSet",
    "KnnModel",
    "Lexicon",
    "Model",
    "Note",
    "NumericError",
    "PcaModel",
    "PhenonoteError",
    "SvmModel",
    "UsageError",
    "Vocabulary",
    "build_vocabulary",
    "class_indices",
    "featurize",
    "fit_pca",
    "fit_svm",
    "load_lexicon",
    "load_model",
    "make_lexicon",
    "micro_f1",
    "normalize_text",
    "prepare_corpus",
    "read_corpus",
    "read_embeddings",
    "run_pipeline",
    "scan_terms",
    "synthesize_embeddings",
    "write_embeddings",
]


def run_pipeline(config=None, log=None, **overrides):
    """Run the end-to-end pipeline and return the summary as a dict.

    ``config`` is an optional path to a ``key = value`` config file. Keyword
    arguments override single keys, e.g. ``run_svm=False, knn_k=5``.
    """
    text = {k: _config_value(v) for k, v in overrides.items()}
    path = None if config is None else str(config)
    return json.loads(_run_pipeline(path, text, log))


def _config_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
