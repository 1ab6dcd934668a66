"""Probability estimation over model counts.

Four estimators share one entry point:

  mle          c / C, zero for unseen events
  laplace      (c + 1) / (C + V)
  addk         (c + k) / (C + kV) with 0 < k <= 1
  good-turing  singleton-mass discounting: the unseen share
               P0 = N1 / N is split uniformly over the context's unseen
               types and seen estimates shrink by (1 - P0)

Estimates are conditional on a context: C is the context total and the
seen-type set is the context's word map. The same arithmetic also runs
over aggregated pseudo-contexts, which is how backoff scoring reuses it.

Good-Turing needs usable singleton statistics. When the model has no
counted windows at all, no singletons, or nothing but singletons, the
discount is undefined or would zero out seen events, so the estimator
falls back to laplace and says so on the package logger.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

from .errors import InvalidArgumentError, ModelEmptyError
from .model import NGramModel

logger = logging.getLogger(__name__)

MLE = "mle"
LAPLACE = "laplace"
ADD_K = "addk"
GOOD_TURING = "good-turing"
METHOD_NAMES = (MLE, LAPLACE, ADD_K, GOOD_TURING)

_EMPTY: dict[str, int] = {}


@dataclass(frozen=True)
class SmoothingMethod:
    name: str
    k: float = 1.0

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise InvalidArgumentError(
                f"unknown smoothing method {self.name!r}; "
                f"expected one of {METHOD_NAMES}"
            )
        if self.name == ADD_K:
            k = self.k
            if not isinstance(k, (int, float)) or isinstance(k, bool):
                raise InvalidArgumentError(f"addk requires a numeric k, got {k!r}")
            if not 0.0 < float(k) <= 1.0:
                raise InvalidArgumentError(
                    f"addk requires 0 < k <= 1, got {k}"
                )

    @classmethod
    def mle(cls) -> "SmoothingMethod":
        return cls(MLE)

    @classmethod
    def laplace(cls) -> "SmoothingMethod":
        return cls(LAPLACE)

    @classmethod
    def add_k(cls, k: float) -> "SmoothingMethod":
        return cls(ADD_K, k=float(k))

    @classmethod
    def good_turing(cls) -> "SmoothingMethod":
        return cls(GOOD_TURING)

    @classmethod
    def parse(cls, name: str, k: float | None = None) -> "SmoothingMethod":
        name = (name or "").strip().lower()
        if name == ADD_K:
            if k is None:
                raise InvalidArgumentError("addk requires a k value")
            return cls.add_k(k)
        if k is not None and name in (MLE, LAPLACE, GOOD_TURING):
            raise InvalidArgumentError(f"{name} does not take a k value")
        return cls(name)

    def label(self) -> str:
        if self.name == ADD_K:
            return f"addk(k={self.k:g})"
        return self.name


@dataclass(frozen=True)
class ProbabilityEstimate:
    value: float
    method: SmoothingMethod
    seen: bool


def _effective_name(model: NGramModel, method: SmoothingMethod) -> str:
    """Resolve good-turing to laplace when its statistics are degenerate."""
    if method.name != GOOD_TURING:
        return method.name
    total = model.total_ngrams
    singletons = model.count_of_counts.get(1, 0)
    if total == 0 or singletons == 0 or singletons == total:
        logger.debug(
            "good-turing fell back to laplace: total_ngrams=%d singletons=%d",
            total,
            singletons,
        )
        return LAPLACE
    return GOOD_TURING


def probability_from_counts(
    model: NGramModel,
    counts: Mapping[str, int],
    total: int,
    word: str,
    method: SmoothingMethod,
) -> ProbabilityEstimate:
    """Score one word against an explicit (counts, total) context view.

    ``counts`` may be a stored context's word map or an aggregate built
    from several contexts; the arithmetic is the same either way.
    """
    vocab_size = len(model.vocabulary)
    if vocab_size == 0:
        raise ModelEmptyError("the model has an empty vocabulary")
    c = counts.get(word, 0)
    name = _effective_name(model, method)

    if name == MLE:
        value = c / total if c else 0.0
        return ProbabilityEstimate(value=value, method=method, seen=c > 0)

    if name == GOOD_TURING:
        p0 = model.count_of_counts[1] / model.total_ngrams
        if total == 0:
            # Nothing seen under this context: every type is unseen,
            # including the queried word if it is out of vocabulary.
            unseen = vocab_size if word in model.vocabulary else vocab_size + 1
            return ProbabilityEstimate(
                value=1.0 / unseen, method=method, seen=False
            )
        unseen = vocab_size - len(counts)
        if c > 0:
            value = (c / total) * (1.0 - p0) if unseen else c / total
            return ProbabilityEstimate(value=value, method=method, seen=True)
        if word not in model.vocabulary:
            unseen += 1
        value = p0 / unseen
        return ProbabilityEstimate(value=value, method=method, seen=False)

    k = 1.0 if name == LAPLACE else method.k
    value = (c + k) / (total + k * vocab_size)
    return ProbabilityEstimate(value=value, method=method, seen=c > 0)


def unseen_probability_from_counts(
    model: NGramModel,
    counts: Mapping[str, int],
    total: int,
    method: SmoothingMethod,
) -> float | None:
    """Shared probability of any in-vocabulary word unseen in ``counts``.

    Returns None when the context has no unseen types, or 0.0 under mle.
    """
    vocab_size = len(model.vocabulary)
    if vocab_size == 0:
        raise ModelEmptyError("the model has an empty vocabulary")
    unseen = vocab_size - len(counts)
    if unseen <= 0:
        return None
    name = _effective_name(model, method)
    if name == MLE:
        return 0.0
    if name == GOOD_TURING:
        if total == 0:
            return 1.0 / vocab_size
        return (model.count_of_counts[1] / model.total_ngrams) / unseen
    k = 1.0 if name == LAPLACE else method.k
    return k / (total + k * vocab_size)


def _context_view(model: NGramModel, context: str) -> tuple[Mapping[str, int], int]:
    counts = model.table.get(context)
    if counts is None:
        return _EMPTY, 0
    return counts, model.context_totals[context]


def probability(
    model: NGramModel, context: str, word: str, method: SmoothingMethod
) -> ProbabilityEstimate:
    """Smoothed P(word | context) for a stored context key."""
    counts, total = _context_view(model, context)
    return probability_from_counts(model, counts, total, word, method)


def distribution(
    model: NGramModel, context: str, method: SmoothingMethod
) -> dict[str, float]:
    """Full next-word distribution over the model vocabulary.

    For every smoothing method except mle the values sum to 1 up to
    floating point error; mle over an unseen context is all zeros.
    """
    vocab_size = len(model.vocabulary)
    if vocab_size == 0:
        raise ModelEmptyError("the model has an empty vocabulary")
    counts, total = _context_view(model, context)
    name = _effective_name(model, method)

    if name == MLE:
        if total == 0:
            return {word: 0.0 for word in model.vocabulary}
        return {
            word: counts.get(word, 0) / total if word in counts else 0.0
            for word in model.vocabulary
        }

    if name == GOOD_TURING:
        if total == 0:
            share = 1.0 / vocab_size
            return {word: share for word in model.vocabulary}
        unseen = vocab_size - len(counts)
        if unseen == 0:
            return {word: counts[word] / total for word in model.vocabulary}
        p0 = model.count_of_counts[1] / model.total_ngrams
        keep = 1.0 - p0
        share = p0 / unseen
        return {
            word: (counts[word] / total) * keep if word in counts else share
            for word in model.vocabulary
        }

    k = 1.0 if name == LAPLACE else method.k
    denominator = total + k * vocab_size
    return {
        word: (counts.get(word, 0) + k) / denominator
        for word in model.vocabulary
    }
