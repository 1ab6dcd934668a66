"""Shared JSON serialization for the CLI and the HTTP service.

Both front ends render prediction and perplexity results through these
functions, so the two surfaces emit byte-identical JSON for the same
state. Key order is fixed by construction and floats go through the
standard repr, which is deterministic for equal values.

Infinite perplexity cannot be encoded as a JSON number, so the payload
carries ``perplexity: null`` together with ``infinite: true``;
``dumps`` refuses NaN and infinities outright to keep that contract.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

from .corpus import CorpusStats, Document
from .evaluate import PerplexityReport
from .model import ModelStats
from .predict import GenerationResult, Prediction
from .smoothing import ADD_K, SmoothingMethod


def dumps(payload) -> str:
    return json.dumps(
        payload, ensure_ascii=False, separators=(",", ":"), allow_nan=False
    )


def smoothing_payload(method: SmoothingMethod) -> dict:
    if method.name == ADD_K:
        return {"name": method.name, "k": method.k}
    return {"name": method.name}


def prediction_payload(prediction: Prediction) -> dict:
    return {
        "word": prediction.word,
        "score": prediction.score,
        "probability": prediction.probability,
        "matched_order": prediction.matched_order,
    }


def predict_payload(
    prompt: str,
    method: SmoothingMethod,
    result: GenerationResult,
    predictions: Sequence[Prediction],
    stale: bool = False,
) -> dict:
    return {
        "prompt": prompt,
        "smoothing": smoothing_payload(method),
        "tokens": list(result.tokens),
        "truncated": result.truncated,
        "predictions": [prediction_payload(p) for p in predictions],
        "stale": stale,
    }


def perplexity_payload(report: PerplexityReport, stale: bool = False) -> dict:
    infinite = math.isinf(report.perplexity)
    return {
        "smoothing": smoothing_payload(report.method),
        "test_token_count": report.test_token_count,
        "scored_positions": report.scored_positions,
        "skipped_prefix": report.skipped_prefix,
        "log2_prob_sum": report.log2_prob_sum,
        "perplexity": None if infinite else report.perplexity,
        "infinite": infinite,
        "zero_probability_positions": report.zero_probability_positions,
        "stale": stale,
    }


def model_stats_payload(stats: ModelStats) -> dict:
    return {
        "n": stats.n,
        "vocabulary_size": stats.vocabulary_size,
        "distinct_contexts": stats.distinct_contexts,
        "distinct_ngrams": stats.distinct_ngrams,
        "total_ngrams": stats.total_ngrams,
        "build_millis": stats.build_millis,
    }


def document_payload(doc: Document) -> dict:
    return doc.metadata()


def corpus_stats_payload(stats: CorpusStats) -> dict:
    return {
        "document_count": stats.document_count,
        "total_tokens": stats.total_tokens,
        "vocabulary_size": stats.vocabulary_size,
    }


def corpus_listing_payload(documents: Sequence[Document], stats: CorpusStats) -> dict:
    return {
        "documents": [document_payload(d) for d in documents],
        "stats": corpus_stats_payload(stats),
    }
