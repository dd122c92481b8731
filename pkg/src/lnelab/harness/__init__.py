"""Corpus, file formats and the command line interface."""

from .corpus import CorpusEntry, Expected, default_corpus, generate_corpus
from .io import ExperimentConfig, GermSpecError, load_germ_spec, parse_germ_spec

__all__ = [
    "CorpusEntry",
    "Expected",
    "ExperimentConfig",
    "GermSpecError",
    "default_corpus",
    "generate_corpus",
    "load_germ_spec",
    "parse_germ_spec",
]
