"""Next-word ranking and greedy text generation.

Prediction first tries the full n-1 token context. When that context
was never seen and backoff is allowed, shorter suffixes of the prompt
are tried in order: n-2 tokens, n-3, down to the empty suffix. The
model only stores full-order contexts, so each shorter order is served
by an aggregated view summing the continuations of every stored context
that ends with the suffix.

Backed-off candidates keep their smoothed probability but are ranked by
a damped score, probability * ln(1 + T) / ln(2 + T) where T is the
matched context's total count. The damping factor is strictly below 1,
so a backed-off score always sits in (0, probability], and contexts
with more evidence are trusted more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    InsufficientContextError,
    InvalidArgumentError,
    ModelEmptyError,
)
from .model import NGramModel, context_key
from .smoothing import (
    MLE,
    SmoothingMethod,
    probability_from_counts,
    unseen_probability_from_counts,
)
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig, tokenize

DEFAULT_TOP = 5
DEFAULT_MAX_GENERATED = 100


@dataclass(frozen=True)
class Prediction:
    word: str
    score: float
    probability: float
    matched_order: int


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    token_count: int = 1
    method: SmoothingMethod = field(default_factory=SmoothingMethod.laplace)
    backoff_enabled: bool = True


@dataclass(frozen=True)
class GenerationResult:
    tokens: tuple[str, ...]
    truncated: bool


def context_weight(model: NGramModel, key: str) -> float:
    """ln(1 + total count under the context); 0 for unseen contexts."""
    return math.log1p(model.context_totals.get(key, 0))


def _damping(total: int) -> float:
    return math.log1p(total) / math.log(2 + total)


def _suffix_view(
    model: NGramModel, suffix: tuple[str, ...]
) -> tuple[dict[str, int], int]:
    """Aggregate continuation counts over stored contexts ending in suffix."""
    counts: dict[str, int] = {}
    if suffix:
        rendered = " ".join(suffix)
        tail = " " + rendered
        for key, inner in model.table.items():
            if key == rendered or key.endswith(tail):
                for word, c in inner.items():
                    counts[word] = counts.get(word, 0) + c
    else:
        for inner in model.table.values():
            for word, c in inner.items():
                counts[word] = counts.get(word, 0) + c
    return counts, sum(counts.values())


def _rank(
    model: NGramModel,
    counts: dict[str, int],
    total: int,
    method: SmoothingMethod,
    top: int,
    matched_order: int,
    damping: float | None,
) -> list[Prediction]:
    scored: list[tuple[str, float]] = []
    for word in counts:
        estimate = probability_from_counts(model, counts, total, word, method)
        if estimate.value > 0.0:
            scored.append((word, estimate.value))
    scored.sort(key=lambda item: (-item[1], item[0]))

    if method.name != MLE:
        unseen_value = unseen_probability_from_counts(model, counts, total, method)
        if unseen_value is not None and unseen_value > 0.0:
            need_fill = len(scored) < top or unseen_value >= scored[top - 1][1]
            if need_fill:
                fill = sorted(
                    word for word in model.vocabulary if word not in counts
                )[:top]
                scored.extend((word, unseen_value) for word in fill)
                scored.sort(key=lambda item: (-item[1], item[0]))

    factor = 1.0 if damping is None else damping
    return [
        Prediction(
            word=word,
            score=value * factor,
            probability=value,
            matched_order=matched_order,
        )
        for word, value in scored[:top]
    ]


def next_word(
    model: NGramModel,
    prompt_tokens: Sequence[str],
    method: SmoothingMethod,
    top: int = DEFAULT_TOP,
    backoff_enabled: bool = True,
) -> list[Prediction]:
    """Rank continuations of a token prompt.

    Returns at most ``top`` predictions ordered by score descending,
    ties broken lexicographically. The list is empty when no context at
    any permitted order has evidence and smoothing cannot invent any
    (mle), or when the model holds no counted windows at all.
    """
    if len(model.vocabulary) == 0:
        raise ModelEmptyError("the model has an empty vocabulary")
    if not isinstance(top, int) or isinstance(top, bool) or top < 1:
        raise InvalidArgumentError(f"top must be a positive integer, got {top!r}")

    prompt = list(prompt_tokens)
    need = model.n - 1

    if len(prompt) >= need:
        key = context_key(prompt[len(prompt) - need :]) if need else ""
        inner = model.table.get(key)
        if inner is not None or not backoff_enabled:
            counts = inner if inner is not None else {}
            total = model.context_totals.get(key, 0)
            return _rank(
                model, counts, total, method, top,
                matched_order=model.n, damping=None,
            )
        ladder_start = need - 1
    else:
        if not backoff_enabled:
            raise InsufficientContextError(
                f"prompt has {len(prompt)} tokens but an order-{model.n} "
                f"model needs {need} of context when backoff is disabled"
            )
        ladder_start = len(prompt)

    for length in range(ladder_start, -1, -1):
        suffix = tuple(prompt[len(prompt) - length :]) if length else ()
        counts, total = _suffix_view(model, suffix)
        if total > 0:
            return _rank(
                model, counts, total, method, top,
                matched_order=length + 1, damping=_damping(total),
            )
    return []


def generate(
    model: NGramModel,
    request: GenerationRequest,
    config: TokenizerConfig = DEFAULT_CONFIG,
    max_tokens: int = DEFAULT_MAX_GENERATED,
) -> GenerationResult:
    """Greedily extend a prompt by ``request.token_count`` tokens.

    Each step takes the single best prediction for the text so far.
    Generation stops early, with ``truncated`` set, when prediction
    returns no candidates.
    """
    count = request.token_count
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise InvalidArgumentError(
            f"token_count must be a positive integer, got {count!r}"
        )
    if count > max_tokens:
        raise InvalidArgumentError(
            f"token_count {count} exceeds the ceiling of {max_tokens}"
        )
    current = tokenize(request.prompt, config)
    generated: list[str] = []
    for _ in range(count):
        predictions = next_word(
            model,
            current,
            request.method,
            top=1,
            backoff_enabled=request.backoff_enabled,
        )
        if not predictions:
            return GenerationResult(tokens=tuple(generated), truncated=True)
        word = predictions[0].word
        generated.append(word)
        current.append(word)
    return GenerationResult(tokens=tuple(generated), truncated=False)
