"""Corpus management: ingestion, bookkeeping, and persistence.

A CorpusStore holds documents in ingestion order. Each document keeps
its token stream (raw text is not retained) plus enough metadata to
answer listing queries. A store can be saved to a directory and loaded
back; the on-disk layout is a JSON manifest next to one token file per
document, written deterministically so that save -> load -> save is
byte-stable.
"""

from __future__ import annotations

import json
import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DocumentNotFoundError,
    EmptyDocumentError,
    GramforgeError,
)
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig, tokenize, tokenize_file

MANIFEST_NAME = "manifest.json"
TOKENS_DIR = "tokens"
STORE_VERSION = 1


@dataclass
class Document:
    id: str
    name: str
    tokens: list[str]
    byte_size: int
    ingested_at: float

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    def metadata(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "byte_size": self.byte_size,
            "token_count": self.token_count,
            "ingested_at": self.ingested_at,
        }


@dataclass
class CorpusStats:
    document_count: int
    total_tokens: int
    vocabulary_size: int


@dataclass
class CorpusStore:
    config: TokenizerConfig = DEFAULT_CONFIG
    documents: list[Document] = field(default_factory=list)
    # Bumped on every mutation; consumers compare generations to detect
    # that a model was built from an older corpus state.
    generation: int = 0

    def _new_id(self) -> str:
        existing = {doc.id for doc in self.documents}
        while True:
            candidate = uuid.uuid4().hex[:12]
            if candidate not in existing:
                return candidate

    def _admit(self, name: str, tokens: list[str], byte_size: int) -> Document:
        if not tokens:
            raise EmptyDocumentError(
                f"document {name!r} produced no tokens after normalization"
            )
        doc = Document(
            id=self._new_id(),
            name=name,
            tokens=tokens,
            byte_size=byte_size,
            ingested_at=time.time(),
        )
        self.documents.append(doc)
        self.generation += 1
        return doc

    def add_document(self, name: str, text: str) -> Document:
        tokens = tokenize(text, self.config)
        byte_size = len(text.encode("utf-8", errors="replace"))
        return self._admit(name, tokens, byte_size)

    def add_document_from_file(self, path, name: str | None = None) -> Document:
        path = Path(path)
        tokens = tokenize_file(path, self.config)
        return self._admit(name or path.name, tokens, path.stat().st_size)

    def get(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise DocumentNotFoundError(f"no document with id {doc_id!r}")

    def remove_document(self, doc_id: str) -> Document:
        doc = self.get(doc_id)
        self.documents.remove(doc)
        self.generation += 1
        return doc

    def clear(self) -> None:
        self.documents.clear()
        self.generation += 1

    def token_documents(self) -> list[list[str]]:
        """Token streams in ingestion order, one list per document."""
        return [doc.tokens for doc in self.documents]

    def stats(self) -> CorpusStats:
        vocab: set[str] = set()
        total = 0
        for doc in self.documents:
            total += len(doc.tokens)
            vocab.update(doc.tokens)
        return CorpusStats(
            document_count=len(self.documents),
            total_tokens=total,
            vocabulary_size=len(vocab),
        )

    def save(self, directory) -> None:
        directory = Path(directory)
        tokens_dir = directory / TOKENS_DIR
        tokens_dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            "version": STORE_VERSION,
            "config": {
                "mode": self.config.mode,
                "lowercase": self.config.lowercase,
                "strip_non_letters": self.config.strip_non_letters,
            },
            "generation": self.generation,
            "documents": [doc.metadata() for doc in self.documents],
        }
        current = {f"{doc.id}.txt" for doc in self.documents}
        for stale in tokens_dir.glob("*.txt"):
            if stale.name not in current:
                stale.unlink()
        for doc in self.documents:
            with open(
                tokens_dir / f"{doc.id}.txt", "w", encoding="utf-8", newline="\n"
            ) as handle:
                handle.write("\n".join(doc.tokens))
                handle.write("\n")
        with open(
            directory / MANIFEST_NAME, "w", encoding="utf-8", newline="\n"
        ) as handle:
            json.dump(manifest, handle, indent=2, ensure_ascii=False)
            handle.write("\n")

    @classmethod
    def load(cls, directory) -> "CorpusStore":
        directory = Path(directory)
        manifest_path = directory / MANIFEST_NAME
        try:
            with open(manifest_path, encoding="utf-8") as handle:
                manifest = json.load(handle)
        except json.JSONDecodeError as exc:
            raise GramforgeError(f"corrupt corpus manifest {manifest_path}: {exc}")
        if manifest.get("version") != STORE_VERSION:
            raise GramforgeError(
                f"unsupported corpus store version {manifest.get('version')!r}"
            )
        cfg = manifest.get("config", {})
        store = cls(
            config=TokenizerConfig(
                mode=cfg.get("mode", "word"),
                lowercase=bool(cfg.get("lowercase", True)),
                strip_non_letters=bool(cfg.get("strip_non_letters", True)),
            )
        )
        for entry in manifest.get("documents", []):
            token_path = directory / TOKENS_DIR / f"{entry['id']}.txt"
            with open(token_path, encoding="utf-8") as handle:
                text = handle.read()
            tokens = text.split("\n")
            if tokens and tokens[-1] == "":
                tokens.pop()
            if len(tokens) != entry["token_count"]:
                raise GramforgeError(
                    f"token file {token_path} holds {len(tokens)} tokens but "
                    f"the manifest recorded {entry['token_count']}"
                )
            store.documents.append(
                Document(
                    id=entry["id"],
                    name=entry["name"],
                    tokens=tokens,
                    byte_size=entry["byte_size"],
                    ingested_at=entry["ingested_at"],
                )
            )
        store.generation = manifest.get("generation", 0)
        return store


def workspace_store_dir(workspace) -> Path:
    return Path(workspace) / "corpus_store"


def load_or_create(workspace, config: TokenizerConfig = DEFAULT_CONFIG) -> CorpusStore:
    """Open the store under a workspace directory, or start an empty one."""
    directory = workspace_store_dir(workspace)
    if (directory / MANIFEST_NAME).exists():
        return CorpusStore.load(directory)
    return CorpusStore(config=config)


def exists(workspace) -> bool:
    return (workspace_store_dir(workspace) / MANIFEST_NAME).exists()


def save_to_workspace(store: CorpusStore, workspace) -> None:
    store.save(workspace_store_dir(workspace))


def file_byte_size(path) -> int:
    return os.path.getsize(path)
