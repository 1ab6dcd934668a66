"""Model evaluation: perplexity and the two benchmark drivers.

Perplexity accumulates log2 probabilities instead of multiplying raw
ones, so scores stay finite for long inputs. The first n-1 positions of
the test stream have no full context and are skipped rather than padded;
the report says how many were skipped. Any scored position with zero
probability (possible under mle only) makes the result infinite.

Benchmarks report medians over repeated runs. The build benchmark emits
one row per corpus with load+tokenize time and per-order build times;
the throughput benchmark times tokenization alone over a corpus big
enough to drown out timer noise.
"""

from __future__ import annotations

import math
import os
import statistics
import time
from dataclasses import dataclass
from typing import Sequence

from . import model as model_mod
from . import smoothing as smoothing_mod
from .errors import InvalidArgumentError, MeasurementError, NoScoreableTokensError
from .model import NGramModel
from .smoothing import SmoothingMethod
from .tokenizer import (
    DEFAULT_CONFIG,
    MIN_PROBE_BYTES,
    TokenizerConfig,
    throughput_probe,
    tokenize_file,
)

BENCH_ORDERS = (1, 2, 3, 4)
MIN_BENCH_REPETITIONS = 3
THROUGHPUT_RUNS = 5
MIN_THROUGHPUT_BYTES = 10_000_000

CSV_HEADER = "corpus_kb,load_tokenize_ms,build_n1_ms,build_n2_ms,build_n3_ms,build_n4_ms"


@dataclass
class PerplexityReport:
    test_token_count: int
    scored_positions: int
    skipped_prefix: int
    log2_prob_sum: float
    perplexity: float
    zero_probability_positions: int
    method: SmoothingMethod


def perplexity(
    model: NGramModel,
    test_tokens: Sequence[str],
    method: SmoothingMethod,
) -> PerplexityReport:
    """Score a token stream against the model.

    perplexity == 2 ** (-log2_prob_sum / scored_positions) whenever all
    scored positions have positive probability; otherwise it is inf and
    log2_prob_sum holds only the finite part.
    """
    tokens = list(test_tokens)
    n = model.n
    total = len(tokens)
    skipped = min(total, n - 1)
    scored = total - skipped
    if scored <= 0:
        raise NoScoreableTokensError(
            f"test stream of {total} tokens leaves nothing to score "
            f"after the {n - 1}-token context prefix"
        )
    log_sum = 0.0
    zeros = 0
    for i in range(n - 1, total):
        key = model_mod.context_key(tokens[i - n + 1 : i])
        estimate = smoothing_mod.probability(model, key, tokens[i], method)
        if estimate.value > 0.0:
            log_sum += math.log2(estimate.value)
        else:
            zeros += 1
    if zeros:
        value = math.inf
    else:
        value = 2.0 ** (-(log_sum / scored))
    return PerplexityReport(
        test_token_count=total,
        scored_positions=scored,
        skipped_prefix=skipped,
        log2_prob_sum=log_sum,
        perplexity=value,
        zero_probability_positions=zeros,
        method=method,
    )


@dataclass
class BenchmarkRecord:
    corpus_path: str
    corpus_kb: float
    load_tokenize_ms: float
    build_ms: dict[int, float]


def bench_build(
    corpus_paths: Sequence[str],
    orders: Sequence[int] = BENCH_ORDERS,
    repetitions: int = MIN_BENCH_REPETITIONS,
    config: TokenizerConfig = DEFAULT_CONFIG,
) -> list[BenchmarkRecord]:
    """Median-of-N timings for tokenization and per-order builds."""
    if repetitions < MIN_BENCH_REPETITIONS:
        raise InvalidArgumentError(
            f"benchmarks need at least {MIN_BENCH_REPETITIONS} repetitions, "
            f"got {repetitions}"
        )
    if not corpus_paths:
        raise InvalidArgumentError("no corpus paths given")
    for n in orders:
        # Validates the order range before any timing work starts.
        NGramModel(n)

    records: list[BenchmarkRecord] = []
    for path in corpus_paths:
        size_kb = os.path.getsize(path) / 1024.0
        load_times: list[float] = []
        tokens: list[str] = []
        for _ in range(repetitions):
            start = time.perf_counter()
            tokens = tokenize_file(path, config)
            load_times.append((time.perf_counter() - start) * 1000.0)
        build_ms: dict[int, float] = {}
        for n in orders:
            runs: list[float] = []
            for _ in range(repetitions):
                result = model_mod.build([tokens], n)
                runs.append(result.build_millis)
            build_ms[n] = statistics.median(runs)
        records.append(
            BenchmarkRecord(
                corpus_path=str(path),
                corpus_kb=size_kb,
                load_tokenize_ms=statistics.median(load_times),
                build_ms=build_ms,
            )
        )
    return records


def benchmark_csv(records: Sequence[BenchmarkRecord]) -> str:
    """Render records as CSV with a fixed header and one row per corpus."""
    lines = [CSV_HEADER]
    for record in records:
        cells = [f"{record.corpus_kb:.1f}", f"{record.load_tokenize_ms:.2f}"]
        for n in BENCH_ORDERS:
            ms = record.build_ms.get(n)
            cells.append("" if ms is None else f"{ms:.2f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_benchmark_csv(text: str) -> list[BenchmarkRecord]:
    lines = [line for line in text.splitlines() if line]
    if not lines or lines[0] != CSV_HEADER:
        raise InvalidArgumentError("unrecognized benchmark CSV header")
    records = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 6:
            raise InvalidArgumentError(f"benchmark CSV row has {len(cells)} cells")
        build_ms = {
            n: float(cells[1 + i + 1])
            for i, n in enumerate(BENCH_ORDERS)
            if cells[1 + i + 1] != ""
        }
        records.append(
            BenchmarkRecord(
                corpus_path="",
                corpus_kb=float(cells[0]),
                load_tokenize_ms=float(cells[1]),
                build_ms=build_ms,
            )
        )
    return records


def bench_throughput(
    corpus_path,
    config: TokenizerConfig = DEFAULT_CONFIG,
    runs: int = THROUGHPUT_RUNS,
) -> float:
    """Median tokens-per-second over repeated tokenizations of one file."""
    size = os.path.getsize(corpus_path)
    if size < MIN_THROUGHPUT_BYTES:
        raise MeasurementError(
            f"throughput corpus is {size} bytes; need at least "
            f"{MIN_THROUGHPUT_BYTES} for a stable reading"
        )
    with open(corpus_path, encoding="utf-8", errors="replace") as handle:
        text = handle.read()
    rates = [throughput_probe(text, config) for _ in range(max(runs, 1))]
    return statistics.median(rates)


def throughput_from_text(
    text: str,
    config: TokenizerConfig = DEFAULT_CONFIG,
    runs: int = THROUGHPUT_RUNS,
) -> float:
    """Median tokens-per-second over text already in memory.

    The text must clear the tokenizer's probe floor; callers with less
    material should repeat it until it does.
    """
    if len(text.encode("utf-8", errors="replace")) < MIN_PROBE_BYTES:
        raise MeasurementError(
            f"need at least {MIN_PROBE_BYTES} bytes of text for a "
            "stable throughput reading"
        )
    rates = [throughput_probe(text, config) for _ in range(max(runs, 1))]
    return statistics.median(rates)
