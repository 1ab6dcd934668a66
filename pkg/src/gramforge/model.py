"""N-gram count models: build, update, prune, save, load, lookup.

The count table maps a context key (the n-1 context tokens joined with
single spaces, or the empty string for unigram models) to a map from
next word to count. Alongside the table the model maintains:

  context_totals   context key -> sum of counts under that context
  vocabulary       every token type ever offered, including tokens in
                   documents shorter than n
  total_ngrams     number of counted windows (with multiplicity)
  distinct_ngrams  number of distinct (context, word) pairs
  count_of_counts  N_c: how many distinct n-grams occur exactly c times

All of these are maintained incrementally so that updating with one
document at a time lands in exactly the state a one-shot build over the
concatenated document list would produce.

Counting itself runs through Counter over a zip of shifted views, which
keeps the per-window work in C. Python-level loops only touch distinct
n-grams, not every token instance.
"""

from __future__ import annotations

import re
import time
from collections import Counter
from dataclasses import dataclass
from itertools import islice
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    InvalidArgumentError,
    InvalidOrderError,
    MalformedLineError,
    ModelVersionError,
    TruncatedModelError,
)

MAX_ORDER = 8

FORMAT_MAGIC = "GRAMFORGE"
FORMAT_VERSION = 1

_HEADER_RE = re.compile(
    r"^GRAMFORGE (\d+) n=(\d+) vocab=(\d+) ngrams=(\d+)$"
)


def context_key(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


def parse_context_key(key: str) -> tuple[str, ...]:
    return tuple(key.split(" ")) if key else ()


@dataclass
class ModelStats:
    n: int
    vocabulary_size: int
    distinct_contexts: int
    distinct_ngrams: int
    total_ngrams: int
    build_millis: float | None = None


class NGramModel:
    def __init__(self, n: int, max_n: int = MAX_ORDER):
        if not isinstance(n, int) or isinstance(n, bool):
            raise InvalidOrderError(f"order must be an integer, got {n!r}")
        if not 1 <= n <= max_n:
            raise InvalidOrderError(
                f"order must satisfy 1 <= n <= {max_n}, got {n}"
            )
        self.n = n
        self.table: dict[str, dict[str, int]] = {}
        self.context_totals: dict[str, int] = {}
        self.vocabulary: set[str] = set()
        self.total_ngrams = 0
        self.distinct_ngrams = 0
        self.count_of_counts: dict[int, int] = {}

    def _merge_counts(self, triples: Iterable[tuple[str, str, int]]) -> None:
        """Fold (context_key, word, delta) triples into every structure."""
        table = self.table
        totals = self.context_totals
        coc = self.count_of_counts
        added = 0
        for key, word, delta in triples:
            inner = table.get(key)
            if inner is None:
                inner = table[key] = {}
                totals[key] = delta
            else:
                totals[key] += delta
            old = inner.get(word)
            if old is None:
                new = delta
                self.distinct_ngrams += 1
            else:
                new = old + delta
                remaining = coc[old] - 1
                if remaining:
                    coc[old] = remaining
                else:
                    del coc[old]
            inner[word] = new
            coc[new] = coc.get(new, 0) + 1
            added += delta
        self.total_ngrams += added

    def update(self, tokens: Sequence[str]) -> None:
        """Fold one document's windows into the model.

        A document shorter than n contributes no windows but its tokens
        still join the vocabulary.
        """
        if not isinstance(tokens, (list, tuple)):
            tokens = list(tokens)
        self.vocabulary.update(tokens)
        n = self.n
        if len(tokens) < n:
            return
        if n == 1:
            grams = Counter(tokens)
            self._merge_counts(("", word, c) for word, c in grams.items())
            return
        windows = Counter(zip(*(islice(tokens, i, None) for i in range(n))))
        self._merge_counts(
            (" ".join(gram[:-1]), gram[-1], c) for gram, c in windows.items()
        )

    def lookup(self, key: str) -> dict[str, int]:
        """Continuation counts under a context key; {} when unseen."""
        return self.table.get(key, {})

    def prune(self, threshold: int) -> int:
        """Drop every context whose summed count is below ``threshold``.

        Returns the number of contexts removed. The vocabulary is left
        alone: pruning thins the table, it does not unlearn words.
        """
        if not isinstance(threshold, int) or isinstance(threshold, bool):
            raise InvalidArgumentError(
                f"prune threshold must be an integer, got {threshold!r}"
            )
        if threshold < 0:
            raise InvalidArgumentError(
                f"prune threshold must be non-negative, got {threshold}"
            )
        doomed = [
            key for key, total in self.context_totals.items() if total < threshold
        ]
        coc = self.count_of_counts
        for key in doomed:
            inner = self.table.pop(key)
            self.total_ngrams -= self.context_totals.pop(key)
            self.distinct_ngrams -= len(inner)
            for c in inner.values():
                remaining = coc[c] - 1
                if remaining:
                    coc[c] = remaining
                else:
                    del coc[c]
        return len(doomed)

    def stats(self, build_millis: float | None = None) -> ModelStats:
        return ModelStats(
            n=self.n,
            vocabulary_size=len(self.vocabulary),
            distinct_contexts=len(self.table),
            distinct_ngrams=self.distinct_ngrams,
            total_ngrams=self.total_ngrams,
            build_millis=build_millis,
        )

    def save(self, destination) -> int:
        """Write the model to ``destination`` and return the byte count.

        Output is deterministic: vocabulary lines sorted, context keys
        sorted, words sorted within each context, LF line endings.
        """
        destination = Path(destination)

        def lines() -> Iterable[str]:
            yield (
                f"{FORMAT_MAGIC} {FORMAT_VERSION} n={self.n} "
                f"vocab={len(self.vocabulary)} ngrams={self.total_ngrams}\n"
            )
            for token in sorted(self.vocabulary):
                yield f"v\t{token}\n"
            for key in sorted(self.table):
                inner = self.table[key]
                for word in sorted(inner):
                    yield f"g\t{key}\t{word}\t{inner[word]}\n"

        with open(destination, "w", encoding="utf-8", newline="\n") as handle:
            handle.writelines(lines())
        return destination.stat().st_size

    @classmethod
    def load(cls, source) -> "NGramModel":
        """Parse a saved model, validating structure as it streams."""
        source = Path(source)
        with open(source, encoding="utf-8", newline="\n") as handle:
            header = handle.readline()
            if not header:
                raise TruncatedModelError("empty model file", line_number=1)
            match = _HEADER_RE.match(header.rstrip("\n"))
            if match is None:
                raise ModelVersionError(
                    f"unrecognized header {header.rstrip()!r}", line_number=1
                )
            version = int(match.group(1))
            if version != FORMAT_VERSION:
                raise ModelVersionError(
                    f"unsupported format version {version}", line_number=1
                )
            n = int(match.group(2))
            declared_vocab = int(match.group(3))
            declared_total = int(match.group(4))
            try:
                model = cls(n)
            except InvalidOrderError as exc:
                raise MalformedLineError(str(exc), line_number=1)

            vocab = model.vocabulary
            table = model.table
            totals = model.context_totals
            coc = model.count_of_counts
            total = 0
            line_number = 1
            for line in handle:
                line_number += 1
                if line.endswith("\n"):
                    line = line[:-1]
                if not line:
                    raise MalformedLineError("blank line", line_number=line_number)
                kind = line[0]
                if kind == "v":
                    if len(line) < 3 or line[1] != "\t":
                        raise MalformedLineError(
                            "vocabulary line must be 'v<TAB>token'",
                            line_number=line_number,
                        )
                    token = line[2:]
                    if "\t" in token:
                        raise MalformedLineError(
                            "vocabulary token contains a tab",
                            line_number=line_number,
                        )
                    if token in vocab:
                        raise MalformedLineError(
                            f"duplicate vocabulary token {token!r}",
                            line_number=line_number,
                        )
                    vocab.add(token)
                    continue
                if kind != "g":
                    raise MalformedLineError(
                        f"unknown record type {kind!r}", line_number=line_number
                    )
                parts = line.split("\t")
                if len(parts) != 4:
                    raise MalformedLineError(
                        "gram line must be 'g<TAB>context<TAB>word<TAB>count'",
                        line_number=line_number,
                    )
                _, key, word, count_text = parts
                if not word:
                    raise MalformedLineError(
                        "empty word field", line_number=line_number
                    )
                context_len = len(key.split(" ")) if key else 0
                if context_len != n - 1:
                    raise MalformedLineError(
                        f"context {key!r} has {context_len} tokens; "
                        f"an order-{n} model needs {n - 1}",
                        line_number=line_number,
                    )
                try:
                    count = int(count_text)
                except ValueError:
                    count = 0
                if count < 1 or not count_text.isdigit():
                    raise MalformedLineError(
                        f"count field {count_text!r} is not a positive integer",
                        line_number=line_number,
                    )
                inner = table.get(key)
                if inner is None:
                    inner = table[key] = {}
                    totals[key] = count
                else:
                    if word in inner:
                        raise MalformedLineError(
                            f"duplicate entry for context {key!r} "
                            f"and word {word!r}",
                            line_number=line_number,
                        )
                    totals[key] += count
                inner[word] = count
                coc[count] = coc.get(count, 0) + 1
                model.distinct_ngrams += 1
                total += count

        model.total_ngrams = total
        if len(vocab) != declared_vocab or total != declared_total:
            raise TruncatedModelError(
                f"header declared vocab={declared_vocab} ngrams={declared_total} "
                f"but the file holds vocab={len(vocab)} ngrams={total}"
            )
        return model


@dataclass
class BuildResult:
    model: NGramModel
    build_millis: float

    @property
    def stats(self) -> ModelStats:
        return self.model.stats(build_millis=self.build_millis)


def build(
    docs: Iterable[Sequence[str]], n: int, max_n: int = MAX_ORDER
) -> BuildResult:
    """Build a model over token documents, timing the whole pass."""
    start = time.perf_counter()
    model = NGramModel(n, max_n=max_n)
    for tokens in docs:
        model.update(tokens)
    millis = (time.perf_counter() - start) * 1000.0
    return BuildResult(model=model, build_millis=millis)
