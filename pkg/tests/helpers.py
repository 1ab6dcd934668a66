"""Small shared utilities for the test suite."""

from __future__ import annotations

import random

from gramforge.model import NGramModel, build

ALPHABET = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]


def random_tokens(rng: random.Random, max_len: int = 200, alphabet=None) -> list[str]:
    alphabet = alphabet or ALPHABET
    length = rng.randint(0, max_len)
    return [rng.choice(alphabet) for _ in range(length)]


def random_docs(
    rng: random.Random,
    max_docs: int = 4,
    max_len: int = 200,
    alphabet=None,
) -> list[list[str]]:
    return [
        random_tokens(rng, max_len, alphabet)
        for _ in range(rng.randint(1, max_docs))
    ]


def random_model(
    rng: random.Random,
    max_n: int = 5,
    max_docs: int = 4,
    max_len: int = 200,
    alphabet=None,
) -> tuple[NGramModel, list[list[str]], int]:
    n = rng.randint(1, max_n)
    docs = random_docs(rng, max_docs, max_len, alphabet)
    return build(docs, n).model, docs, n


def model_fields(model: NGramModel) -> tuple:
    return (
        model.n,
        model.table,
        model.context_totals,
        model.vocabulary,
        model.total_ngrams,
        model.distinct_ngrams,
        model.count_of_counts,
    )


def assert_models_equal(left: NGramModel, right: NGramModel) -> None:
    assert left.n == right.n
    assert left.table == right.table
    assert left.context_totals == right.context_totals
    assert left.vocabulary == right.vocabulary
    assert left.total_ngrams == right.total_ngrams
    assert left.distinct_ngrams == right.distinct_ngrams
    assert left.count_of_counts == right.count_of_counts


def assert_model_consistent(model: NGramModel) -> None:
    """Re-derive every cached structure from the table and compare."""
    totals = {key: sum(inner.values()) for key, inner in model.table.items()}
    assert model.context_totals == totals
    assert model.total_ngrams == sum(totals.values())
    assert model.distinct_ngrams == sum(len(inner) for inner in model.table.values())
    coc: dict[int, int] = {}
    for inner in model.table.values():
        for c in inner.values():
            coc[c] = coc.get(c, 0) + 1
    assert model.count_of_counts == coc
    assert sum(c * times for c, times in coc.items()) == model.total_ngrams
    for key, inner in model.table.items():
        assert inner, f"context {key!r} kept with no continuations"
        pieces = key.split(" ") if key else []
        assert len(pieces) == model.n - 1
        for word, count in inner.items():
            assert count >= 1
            assert word in model.vocabulary
        for piece in pieces:
            assert piece in model.vocabulary
