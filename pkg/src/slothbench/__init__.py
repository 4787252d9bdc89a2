"""Efficiency-degradation testing for a toy GRU translator."""

from .model import ModelConfig, ModelWeights, Seq2Seq
from .sloth import Kind, TestCase, generate_test
from .tokenizer import TokenSequence, Vocabulary, default_lexicon, default_vocabulary, tokenize

__all__ = [
    "Kind",
    "ModelConfig",
    "ModelWeights",
    "Seq2Seq",
    "TestCase",
    "TokenSequence",
    "Vocabulary",
    "default_lexicon",
    "default_vocabulary",
    "generate_test",
    "tokenize",
]
__version__ = "0.1.0"
