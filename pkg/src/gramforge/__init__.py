"""gramforge: a count-based n-gram language modeling engine.

Build models from plain-text corpora, smooth and query them, score test
text, and serve everything over a CLI or an embedded HTTP API.
"""

from .corpus import CorpusStore, Document
from .errors import GramforgeError
from .model import MAX_ORDER, NGramModel, build
from .predict import GenerationRequest, GenerationResult, Prediction, generate, next_word
from .smoothing import SmoothingMethod, distribution, probability
from .tokenizer import TokenizerConfig, tokenize, tokenize_file

__version__ = "0.1.0"

__all__ = [
    "CorpusStore",
    "Document",
    "GenerationRequest",
    "GenerationResult",
    "GramforgeError",
    "MAX_ORDER",
    "NGramModel",
    "Prediction",
    "SmoothingMethod",
    "TokenizerConfig",
    "build",
    "distribution",
    "generate",
    "next_word",
    "probability",
    "tokenize",
    "tokenize_file",
    "__version__",
]
