"""Command-line front door for the engine.

One subcommand per capability: ingest, corpus-list, corpus-remove,
corpus-clear, build, update, prune, predict, complete, perplexity,
bench, serve. Exit codes follow a strict discipline: 0 success, 1 usage
error (bad subcommand, bad flag, bad flag value), 2 runtime error
(engine or I/O failure). ``--json`` switches every subcommand to a
machine-readable payload on standard output.

Persistent state lives under a workspace directory, ``~/.gramforge`` by
default, overridden by the GRAMFORGE_WORKSPACE environment variable.
The corpus store sits in ``<workspace>/corpus_store`` and the default
model path is ``<workspace>/model.gf``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluate, model as model_mod, predict as predict_mod, wire
from .errors import CorpusEmptyError, GramforgeError, InvalidArgumentError
from .model import MAX_ORDER, NGramModel
from .predict import DEFAULT_MAX_GENERATED, GenerationRequest
from .smoothing import SmoothingMethod
from .tokenizer import DEFAULT_CONFIG, tokenize, tokenize_file

WORKSPACE_ENV = "GRAMFORGE_WORKSPACE"
DEFAULT_MODEL_NAME = "model.gf"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting itself."""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def workspace_dir() -> Path:
    override = os.environ.get(WORKSPACE_ENV)
    if override:
        return Path(override)
    return Path.home() / ".gramforge"


def default_model_path() -> Path:
    return workspace_dir() / DEFAULT_MODEL_NAME


def _parse_smoothing(args) -> SmoothingMethod:
    try:
        return SmoothingMethod.parse(args.smoothing, args.k)
    except InvalidArgumentError as exc:
        raise UsageError(f"gramforge: error: {exc}")


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise UsageError(f"gramforge: error: {message}")


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(wire.dumps(payload))
    else:
        print(human)


def _open_store(create: bool = True) -> corpus_mod.CorpusStore:
    workspace = workspace_dir()
    if not create and not corpus_mod.exists(workspace):
        raise CorpusEmptyError(
            f"no corpus store under {workspace}; run 'gramforge ingest' first"
        )
    return corpus_mod.load_or_create(workspace)


def _save_store(store: corpus_mod.CorpusStore) -> None:
    corpus_mod.save_to_workspace(store, workspace_dir())


def _load_model(args) -> NGramModel:
    path = Path(args.model) if args.model else default_model_path()
    return NGramModel.load(path)


def cmd_ingest(args) -> None:
    store = _open_store()
    added = [store.add_document_from_file(path) for path in args.corpus]
    _save_store(store)
    stats = store.stats()
    payload = {
        "ingested": [wire.document_payload(doc) for doc in added],
        "stats": wire.corpus_stats_payload(stats),
    }
    lines = [
        f"ingested {doc.id}  {doc.name}  ({doc.token_count} tokens)"
        for doc in added
    ]
    lines.append(
        f"corpus now holds {stats.document_count} documents, "
        f"{stats.total_tokens} tokens, vocabulary {stats.vocabulary_size}"
    )
    _emit(args, payload, "\n".join(lines))


def cmd_corpus_list(args) -> None:
    store = _open_store()
    stats = store.stats()
    payload = wire.corpus_listing_payload(store.documents, stats)
    if not store.documents:
        human = "corpus is empty"
    else:
        lines = [
            f"{doc.id}  {doc.token_count:>10} tokens  {doc.name}"
            for doc in store.documents
        ]
        lines.append(
            f"total: {stats.document_count} documents, {stats.total_tokens} "
            f"tokens, vocabulary {stats.vocabulary_size}"
        )
        human = "\n".join(lines)
    _emit(args, payload, human)


def cmd_corpus_remove(args) -> None:
    store = _open_store(create=False)
    doc = store.remove_document(args.id)
    _save_store(store)
    payload = {
        "removed": wire.document_payload(doc),
        "stats": wire.corpus_stats_payload(store.stats()),
    }
    _emit(args, payload, f"removed {doc.id}  {doc.name}")


def cmd_corpus_clear(args) -> None:
    store = _open_store()
    removed = len(store.documents)
    store.clear()
    _save_store(store)
    payload = {"cleared": True, "removed_documents": removed}
    _emit(args, payload, f"cleared {removed} documents")


def _build_docs(args) -> list[list[str]]:
    if args.corpus:
        return [tokenize_file(path) for path in args.corpus]
    store = _open_store(create=False)
    docs = store.token_documents()
    if not docs:
        raise CorpusEmptyError("the corpus store holds no documents")
    return docs


def _describe_stats(stats, out: Path, byte_count: int) -> str:
    built = (
        ""
        if stats.build_millis is None
        else f" in {stats.build_millis:.1f} ms"
    )
    return (
        f"order {stats.n}: {stats.total_ngrams} windows over "
        f"{stats.distinct_ngrams} distinct n-grams, "
        f"{stats.distinct_contexts} contexts, vocabulary "
        f"{stats.vocabulary_size}{built}\n"
        f"wrote {byte_count} bytes to {out}"
    )


def cmd_build(args) -> None:
    docs = _build_docs(args)
    result = model_mod.build(docs, args.n)
    out = Path(args.out) if args.out else default_model_path()
    out.parent.mkdir(parents=True, exist_ok=True)
    byte_count = result.model.save(out)
    stats = result.stats
    payload = {
        "model": wire.model_stats_payload(stats),
        "out": str(out),
        "bytes": byte_count,
    }
    _emit(args, payload, _describe_stats(stats, out, byte_count))


def cmd_update(args) -> None:
    model = _load_model(args)
    for path in args.corpus:
        model.update(tokenize_file(path))
    out = Path(args.out) if args.out else Path(
        args.model if args.model else default_model_path()
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    byte_count = model.save(out)
    stats = model.stats()
    payload = {
        "model": wire.model_stats_payload(stats),
        "out": str(out),
        "bytes": byte_count,
    }
    _emit(args, payload, _describe_stats(stats, out, byte_count))


def cmd_prune(args) -> None:
    model = _load_model(args)
    removed = model.prune(args.threshold)
    out = Path(args.out) if args.out else Path(
        args.model if args.model else default_model_path()
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    byte_count = model.save(out)
    stats = model.stats()
    payload = {
        "removed_contexts": removed,
        "model": wire.model_stats_payload(stats),
        "out": str(out),
        "bytes": byte_count,
    }
    human = (
        f"pruned {removed} contexts\n"
        + _describe_stats(stats, out, byte_count)
    )
    _emit(args, payload, human)


def cmd_predict(args) -> None:
    method = _parse_smoothing(args)
    model = _load_model(args)
    backoff = not args.no_backoff
    request = GenerationRequest(
        prompt=args.prompt,
        token_count=args.count,
        method=method,
        backoff_enabled=backoff,
    )
    result = predict_mod.generate(model, request)
    predictions = predict_mod.next_word(
        model, tokenize(args.prompt, DEFAULT_CONFIG), method,
        top=args.top, backoff_enabled=backoff,
    )
    payload = wire.predict_payload(
        args.prompt, method, result, predictions, stale=False
    )
    _emit(args, payload, " ".join(result.tokens))


def cmd_complete(args) -> None:
    method = _parse_smoothing(args)
    model = _load_model(args)
    request = GenerationRequest(
        prompt=args.prompt,
        token_count=args.count,
        method=method,
        backoff_enabled=not args.no_backoff,
    )
    result = predict_mod.generate(model, request)
    prompt_tokens = tokenize(args.prompt, DEFAULT_CONFIG)
    text = " ".join(prompt_tokens + list(result.tokens))
    payload = {
        "prompt": args.prompt,
        "smoothing": wire.smoothing_payload(method),
        "tokens": list(result.tokens),
        "truncated": result.truncated,
        "text": text,
    }
    _emit(args, payload, text)


def cmd_perplexity(args) -> None:
    method = _parse_smoothing(args)
    model = _load_model(args)
    if args.text is not None:
        tokens = tokenize(args.text, DEFAULT_CONFIG)
    else:
        tokens = tokenize_file(args.corpus[0])
    report = evaluate.perplexity(model, tokens, method)
    payload = wire.perplexity_payload(report, stale=False)
    if math.isinf(report.perplexity):
        human = (
            f"perplexity: inf ({report.zero_probability_positions} "
            f"zero-probability positions of {report.scored_positions} scored)"
        )
    else:
        human = (
            f"perplexity: {report.perplexity:.4f} over "
            f"{report.scored_positions} scored positions "
            f"(skipped {report.skipped_prefix}, method {method.label()})"
        )
    _emit(args, human=human, payload=payload)


def cmd_bench(args) -> None:
    if args.throughput:
        rate = evaluate.bench_throughput(args.corpus[0])
        payload = {"tokens_per_second": rate}
        _emit(args, payload, f"tokens_per_second: {rate:.1f}")
        return
    records = evaluate.bench_build(args.corpus)
    csv_text = evaluate.benchmark_csv(records)
    if args.json:
        payload = {
            "records": [
                {
                    "corpus_path": r.corpus_path,
                    "corpus_kb": r.corpus_kb,
                    "load_tokenize_ms": r.load_tokenize_ms,
                    "build_ms": {str(n): ms for n, ms in r.build_ms.items()},
                }
                for r in records
            ],
            "csv": csv_text,
        }
        print(wire.dumps(payload))
    else:
        print(csv_text, end="")


def cmd_serve(args) -> None:
    from .service import serve

    if args.json:
        print(
            wire.dumps({"event": "serving", "host": args.host, "port": args.port}),
            flush=True,
        )
    else:
        print(f"serving on http://{args.host}:{args.port}", flush=True)
    serve(port=args.port, host=args.host)


def _add_model_flag(parser, required: bool = False) -> None:
    parser.add_argument(
        "--model",
        required=required,
        help="model file path (default: <workspace>/model.gf)",
    )


def _add_smoothing_flags(parser) -> None:
    parser.add_argument(
        "--smoothing",
        default="laplace",
        help="mle, laplace, addk, or good-turing (default laplace)",
    )
    parser.add_argument("--k", type=float, default=None, help="addk pseudo-count")


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--json", action="store_true", help="machine-readable output"
    )

    parser = _Parser(prog="gramforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ingest", parents=[common], help="add text files to the corpus store")
    p.add_argument("--corpus", action="append", required=True, help="text file to ingest")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("corpus-list", parents=[common], help="list stored documents")
    p.set_defaults(handler=cmd_corpus_list)

    p = sub.add_parser("corpus-remove", parents=[common], help="remove one document")
    p.add_argument("--id", required=True, help="document id to remove")
    p.set_defaults(handler=cmd_corpus_remove)

    p = sub.add_parser("corpus-clear", parents=[common], help="remove every document")
    p.set_defaults(handler=cmd_corpus_clear)

    p = sub.add_parser("build", parents=[common], help="build a model")
    p.add_argument("--corpus", action="append", help="text file (else: the corpus store)")
    p.add_argument("--n", type=int, required=True, help="model order")
    p.add_argument("--out", help="model output path")
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("update", parents=[common], help="fold more text into a model")
    _add_model_flag(p)
    p.add_argument("--corpus", action="append", required=True, help="text file to add")
    p.add_argument("--out", help="output path (default: in place)")
    p.set_defaults(handler=cmd_update)

    p = sub.add_parser("prune", parents=[common], help="drop rare contexts")
    _add_model_flag(p)
    p.add_argument("--threshold", type=int, required=True, help="minimum context total")
    p.add_argument("--out", help="output path (default: in place)")
    p.set_defaults(handler=cmd_prune)

    p = sub.add_parser("predict", parents=[common], help="rank continuations of a prompt")
    _add_model_flag(p)
    p.add_argument("--prompt", required=True, help="prompt text")
    p.add_argument("--count", type=int, default=1, help="continuation length (default 1)")
    p.add_argument("--top", type=int, default=predict_mod.DEFAULT_TOP, help="ranked candidates to return")
    p.add_argument("--no-backoff", action="store_true", help="disable shorter-context fallback")
    _add_smoothing_flags(p)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("complete", parents=[common], help="greedily extend a prompt")
    _add_model_flag(p)
    p.add_argument("--prompt", required=True, help="prompt text")
    p.add_argument("--count", type=int, default=10, help="tokens to generate (default 10)")
    p.add_argument("--no-backoff", action="store_true", help="disable shorter-context fallback")
    _add_smoothing_flags(p)
    p.set_defaults(handler=cmd_complete)

    p = sub.add_parser("perplexity", parents=[common], help="score test text")
    _add_model_flag(p)
    p.add_argument("--text", help="test text")
    p.add_argument("--corpus", action="append", help="test text file")
    _add_smoothing_flags(p)
    p.set_defaults(handler=cmd_perplexity)

    p = sub.add_parser("bench", parents=[common], help="timing benchmarks")
    p.add_argument("--corpus", action="append", required=True, help="benchmark corpus file")
    p.add_argument(
        "--throughput",
        action="store_true",
        help="measure tokenizer throughput instead of build times",
    )
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000, help="listen port (default 8000)")
    p.add_argument("--host", default="127.0.0.1", help="bind address (default 127.0.0.1)")
    p.set_defaults(handler=cmd_serve)

    return parser


def _validate(args) -> None:
    """Range-check flag values before any file or network I/O."""
    if getattr(args, "n", None) is not None:
        _check(1 <= args.n <= MAX_ORDER, f"--n must be in 1..{MAX_ORDER}, got {args.n}")
    if getattr(args, "count", None) is not None:
        _check(args.count >= 1, f"--count must be positive, got {args.count}")
        _check(
            args.count <= DEFAULT_MAX_GENERATED,
            f"--count may not exceed {DEFAULT_MAX_GENERATED}, got {args.count}",
        )
    if getattr(args, "top", None) is not None:
        _check(args.top >= 1, f"--top must be positive, got {args.top}")
    if getattr(args, "threshold", None) is not None:
        _check(args.threshold >= 0, f"--threshold must be non-negative, got {args.threshold}")
    if getattr(args, "port", None) is not None:
        _check(0 < args.port < 65536, f"--port must be in 1..65535, got {args.port}")
    if args.command == "perplexity":
        has_text = args.text is not None
        has_corpus = bool(args.corpus)
        _check(
            has_text != has_corpus,
            "perplexity needs exactly one of --text or --corpus",
        )
    if getattr(args, "smoothing", None) is not None:
        _parse_smoothing(args)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        args.handler(args)
        return 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except GramforgeError as exc:
        print(f"gramforge: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gramforge: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
