"""Text normalization and tokenization.

The normalization pipeline is deliberately small: optionally lowercase,
optionally strip every character outside the ASCII letter range (plus
whitespace), then split. Word mode splits on whitespace runs; character
mode emits each remaining non-whitespace character as its own token.

Tokens returned by this module are interned so that the many repeats in
a large corpus share one string object each instead of carrying millions
of duplicate copies.
"""

from __future__ import annotations

import re
import sys
import time
from dataclasses import dataclass

from .errors import InvalidArgumentError, MeasurementError

WORD = "word"
CHARACTER = "character"
MODES = (WORD, CHARACTER)

# Smallest input throughput_probe will accept, in UTF-8 bytes. Anything
# shorter finishes too fast for the clock to say something meaningful.
MIN_PROBE_BYTES = 1_000_000

_STRIP_LOWERED = re.compile(r"[^a-z\s]+")
_STRIP_CASED = re.compile(r"[^a-zA-Z\s]+")


@dataclass(frozen=True)
class TokenizerConfig:
    mode: str = WORD
    lowercase: bool = True
    strip_non_letters: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(
                f"unknown tokenizer mode {self.mode!r}; expected one of {MODES}"
            )


DEFAULT_CONFIG = TokenizerConfig()


def normalize(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> str:
    """Apply the configured case folding and character stripping."""
    if config.lowercase:
        text = text.lower()
    if config.strip_non_letters:
        pattern = _STRIP_LOWERED if config.lowercase else _STRIP_CASED
        text = pattern.sub("", text)
    return text


def _split(normalized: str, config: TokenizerConfig) -> list[str]:
    if config.mode == WORD:
        return list(map(sys.intern, normalized.split()))
    return [ch for ch in normalized if not ch.isspace()]


def tokenize(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> list[str]:
    """Tokenize a string already held in memory."""
    return _split(normalize(text, config), config)


def decode_bytes(data: bytes) -> str:
    """Decode UTF-8, substituting the replacement character on bad bytes."""
    return data.decode("utf-8", errors="replace")


def tokenize_file(
    path,
    config: TokenizerConfig = DEFAULT_CONFIG,
    chunk_chars: int = 4_000_000,
) -> list[str]:
    """Tokenize a text file without loading it whole.

    Reads fixed-size chunks and carries the trailing word fragment over
    to the next chunk so words are never split at chunk boundaries.
    """
    tokens: list[str] = []
    pending = ""
    with open(path, encoding="utf-8", errors="replace") as handle:
        while True:
            chunk = handle.read(chunk_chars)
            if not chunk:
                break
            normalized = pending + normalize(chunk, config)
            pending = ""
            if config.mode == WORD:
                parts = normalized.split()
                if parts and not normalized[-1].isspace():
                    pending = parts.pop()
                tokens.extend(map(sys.intern, parts))
            else:
                tokens.extend(ch for ch in normalized if not ch.isspace())
    if pending:
        tokens.append(sys.intern(pending))
    return tokens


def throughput_probe(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> float:
    """Tokenize ``text`` once and return tokens per second of wall time.

    Refuses inputs under MIN_PROBE_BYTES: timing a tiny string measures
    interpreter noise, not the tokenizer.
    """
    size = len(text.encode("utf-8", errors="replace"))
    if size < MIN_PROBE_BYTES:
        raise MeasurementError(
            f"probe text is {size} bytes; need at least {MIN_PROBE_BYTES} "
            "for a stable throughput reading"
        )
    start = time.perf_counter()
    tokens = tokenize(text, config)
    elapsed = time.perf_counter() - start
    if elapsed <= 0.0:
        elapsed = 1e-9
    return len(tokens) / elapsed
