"""Vocabulary extension for byte-level BPE language models."""

from ._lingua_adapt import (
    LanguageModel,
    LinguaAdaptError,
    Tokenizer,
    bleu,
    fertility,
    forgetting_delta,
    merge_tokenizers,
    percent_gen,
    synthetic_corpus,
)

__all__ = [
    "LanguageModel",
    "LinguaAdaptError",
    "Tokenizer",
    "bleu",
    "fertility",
    "forgetting_delta",
    "merge_tokenizers",
    "percent_gen",
    "synthetic_corpus",
]
