import json

import pytest

from gramforge.cli import run
from gramforge.evaluate import CSV_HEADER
from gramforge.model import NGramModel, build
from gramforge.tokenizer import tokenize_file

SENTENCE = "The cat is sleeping"
SECOND = "a dog is barking"


def run_cli(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def corpus_file(tmp_path):
    return write(tmp_path / "corpus.txt", SENTENCE + "\n")


@pytest.fixture
def built_model(ws, tmp_path, corpus_file, capsys):
    out = tmp_path / "model.gf"
    code, _, _ = run_cli(
        capsys, "build", "--corpus", corpus_file, "--n", "3", "--out", str(out)
    )
    assert code == 0
    return str(out)


def test_ingest_and_list(ws, tmp_path, capsys):
    corpus = write(tmp_path / "a.txt", "The cat... IS sleeping!!\n")
    code, out, err = run_cli(capsys, "ingest", "--corpus", corpus, "--json")
    assert code == 0 and err == ""
    payload = json.loads(out)
    assert len(payload["ingested"]) == 1
    doc = payload["ingested"][0]
    assert doc["name"] == "a.txt"
    assert doc["token_count"] == 4
    assert payload["stats"] == {
        "document_count": 1,
        "total_tokens": 4,
        "vocabulary_size": 4,
    }

    code, out, _ = run_cli(capsys, "corpus-list", "--json")
    assert code == 0
    listing = json.loads(out)
    assert [d["id"] for d in listing["documents"]] == [doc["id"]]

    code, out, _ = run_cli(capsys, "corpus-list")
    assert code == 0
    assert doc["id"] in out
    assert "total: 1 documents" in out


def test_corpus_remove_and_clear(ws, tmp_path, capsys):
    a = write(tmp_path / "a.txt", "alpha beta\n")
    b = write(tmp_path / "b.txt", "gamma delta\n")
    code, out, _ = run_cli(capsys, "ingest", "--corpus", a, "--corpus", b, "--json")
    assert code == 0
    ids = [d["id"] for d in json.loads(out)["ingested"]]

    code, out, _ = run_cli(capsys, "corpus-remove", "--id", ids[0], "--json")
    assert code == 0
    assert json.loads(out)["removed"]["id"] == ids[0]

    code, out, _ = run_cli(capsys, "corpus-clear", "--json")
    assert code == 0
    assert json.loads(out) == {"cleared": True, "removed_documents": 1}

    code, out, _ = run_cli(capsys, "corpus-list")
    assert code == 0
    assert "corpus is empty" in out


def test_build_writes_a_loadable_model(ws, tmp_path, corpus_file, capsys):
    out_path = tmp_path / "m.gf"
    code, out, _ = run_cli(
        capsys,
        "build", "--corpus", corpus_file, "--n", "2", "--out", str(out_path),
        "--json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["model"]["n"] == 2
    assert payload["model"]["total_ngrams"] == 3
    assert payload["model"]["build_millis"] >= 0
    assert payload["out"] == str(out_path)
    assert payload["bytes"] == out_path.stat().st_size

    loaded = NGramModel.load(out_path)
    expected = build([tokenize_file(corpus_file)], 2).model
    assert loaded.table == expected.table
    assert loaded.vocabulary == expected.vocabulary


def test_build_human_output(ws, tmp_path, corpus_file, capsys):
    out_path = tmp_path / "m.gf"
    code, out, _ = run_cli(
        capsys, "build", "--corpus", corpus_file, "--n", "2", "--out", str(out_path)
    )
    assert code == 0
    assert "order 2:" in out
    assert f"wrote {out_path.stat().st_size} bytes to {out_path}" in out


def test_build_from_corpus_store(ws, tmp_path, capsys):
    a = write(tmp_path / "a.txt", SENTENCE + "\n")
    b = write(tmp_path / "b.txt", SECOND + "\n")
    assert run_cli(capsys, "ingest", "--corpus", a, "--corpus", b)[0] == 0
    code, _, _ = run_cli(capsys, "build", "--n", "2")
    assert code == 0
    loaded = NGramModel.load(ws / "model.gf")
    expected = build([tokenize_file(a), tokenize_file(b)], 2).model
    assert loaded.table == expected.table


def test_build_without_any_corpus_fails(ws, capsys):
    code, _, err = run_cli(capsys, "build", "--n", "2")
    assert code == 2
    assert "error" in err


def test_usage_errors_exit_1(ws, tmp_path, capsys):
    model = str(tmp_path / "whatever.gf")
    bad_invocations = [
        [],
        ["not-a-command"],
        ["build"],
        ["build", "--n", "0"],
        ["build", "--n", "9"],
        ["build", "--n", "two"],
        ["ingest"],
        ["corpus-remove"],
        ["predict", "--model", model],
        ["predict", "--model", model, "--prompt", "x", "--count", "0"],
        ["predict", "--model", model, "--prompt", "x", "--count", "101"],
        ["predict", "--model", model, "--prompt", "x", "--top", "0"],
        ["predict", "--model", model, "--prompt", "x", "--smoothing", "bogus"],
        ["predict", "--model", model, "--prompt", "x", "--smoothing", "addk"],
        ["predict", "--model", model, "--prompt", "x", "--smoothing", "laplace", "--k", "0.5"],
        ["predict", "--model", model, "--prompt", "x", "--smoothing", "addk", "--k", "2"],
        ["complete", "--model", model, "--prompt", "x", "--count", "-1"],
        ["prune", "--model", model],
        ["prune", "--model", model, "--threshold", "-1"],
        ["perplexity", "--model", model],
        ["perplexity", "--model", model, "--text", "a", "--corpus", "b.txt"],
        ["bench"],
        ["serve", "--port", "0"],
        ["serve", "--port", "70000"],
    ]
    for argv in bad_invocations:
        code, _, err = run_cli(capsys, *argv)
        assert code == 1, argv
        assert err.strip(), argv


def test_runtime_errors_exit_2(ws, tmp_path, built_model, capsys):
    missing = str(tmp_path / "missing.gf")
    cases = [
        ["predict", "--model", missing, "--prompt", "the cat"],
        ["update", "--model", built_model, "--corpus", str(tmp_path / "nope.txt")],
        ["build", "--corpus", str(tmp_path / "nope.txt"), "--n", "2"],
        ["corpus-remove", "--id", "deadbeef"],
        ["perplexity", "--model", built_model, "--text", "the"],
        ["bench", "--throughput", "--corpus", built_model],
    ]
    for argv in cases:
        code, _, err = run_cli(capsys, *argv)
        assert code == 2, argv
        assert "gramforge: error:" in err, argv


def test_malformed_model_file_exits_2(ws, tmp_path, capsys):
    bad = write(tmp_path / "bad.gf", "GRAMFORGE 9 n=2 vocab=0 ngrams=0\n")
    code, _, err = run_cli(capsys, "predict", "--model", bad, "--prompt", "x")
    assert code == 2
    assert "line 1" in err


def test_predict_prints_continuation_only(ws, built_model, capsys):
    code, out, err = run_cli(
        capsys,
        "predict", "--model", built_model, "--prompt", "The cat", "--count", "1",
    )
    assert code == 0 and err == ""
    assert out == "is\n"


def test_predict_json_contract(ws, built_model, capsys):
    code, out, _ = run_cli(
        capsys,
        "predict", "--model", built_model, "--prompt", "The cat",
        "--count", "2", "--top", "3", "--json",
    )
    assert code == 0
    payload = json.loads(out)
    assert list(payload) == [
        "prompt", "smoothing", "tokens", "truncated", "predictions", "stale",
    ]
    assert payload["prompt"] == "The cat"
    assert payload["smoothing"] == {"name": "laplace"}
    assert payload["tokens"] == ["is", "sleeping"]
    assert payload["truncated"] is False
    assert payload["stale"] is False
    assert payload["predictions"][0]["word"] == "is"
    assert list(payload["predictions"][0]) == [
        "word", "score", "probability", "matched_order",
    ]
    assert payload["predictions"][0]["matched_order"] == 3


def test_predict_addk_payload_carries_k(ws, built_model, capsys):
    code, out, _ = run_cli(
        capsys,
        "predict", "--model", built_model, "--prompt", "the cat",
        "--smoothing", "addk", "--k", "0.5", "--json",
    )
    assert code == 0
    assert json.loads(out)["smoothing"] == {"name": "addk", "k": 0.5}


def test_predict_no_backoff_short_prompt_fails(ws, built_model, capsys):
    code, _, err = run_cli(
        capsys,
        "predict", "--model", built_model, "--prompt", "cat", "--no-backoff",
    )
    assert code == 2
    assert "context" in err


def test_complete_prints_prompt_plus_generation(ws, built_model, capsys):
    code, out, _ = run_cli(
        capsys,
        "complete", "--model", built_model, "--prompt", "The cat", "--count", "2",
    )
    assert code == 0
    assert out == "the cat is sleeping\n"

    code, out, _ = run_cli(
        capsys,
        "complete", "--model", built_model, "--prompt", "The cat",
        "--count", "2", "--json",
    )
    payload = json.loads(out)
    assert payload["text"] == "the cat is sleeping"
    assert payload["tokens"] == ["is", "sleeping"]
    assert payload["truncated"] is False


def test_perplexity_text_and_file_agree(ws, tmp_path, built_model, capsys):
    test_text = "the cat is sleeping"
    test_file = write(tmp_path / "test.txt", test_text + "\n")
    code, out_text, _ = run_cli(
        capsys,
        "perplexity", "--model", built_model, "--text", test_text, "--json",
    )
    assert code == 0
    code, out_file, _ = run_cli(
        capsys,
        "perplexity", "--model", built_model, "--corpus", test_file, "--json",
    )
    assert code == 0
    assert out_text == out_file
    payload = json.loads(out_text)
    assert payload["test_token_count"] == 4
    assert payload["skipped_prefix"] == 2
    assert payload["scored_positions"] == 2
    assert payload["infinite"] is False
    assert payload["perplexity"] > 0
    assert payload["stale"] is False


def test_perplexity_human_line(ws, built_model, capsys):
    code, out, _ = run_cli(
        capsys,
        "perplexity", "--model", built_model, "--text", "the cat is sleeping",
    )
    assert code == 0
    assert out.startswith("perplexity: ")
    assert "2 scored positions" in out
    assert "skipped 2" in out


def test_perplexity_infinite_under_mle(ws, built_model, capsys):
    code, out, _ = run_cli(
        capsys,
        "perplexity", "--model", built_model,
        "--text", "the cat is barking", "--smoothing", "mle", "--json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["perplexity"] is None
    assert payload["infinite"] is True
    assert payload["zero_probability_positions"] == 1

    code, out, _ = run_cli(
        capsys,
        "perplexity", "--model", built_model,
        "--text", "the cat is barking", "--smoothing", "mle",
    )
    assert code == 0
    assert "perplexity: inf" in out


def test_update_in_place_matches_batch_build(ws, tmp_path, capsys):
    a = write(tmp_path / "a.txt", SENTENCE + "\n")
    b = write(tmp_path / "b.txt", SECOND + "\n")
    model_path = str(tmp_path / "m.gf")
    assert run_cli(capsys, "build", "--corpus", a, "--n", "2", "--out", model_path)[0] == 0
    code, out, _ = run_cli(
        capsys, "update", "--model", model_path, "--corpus", b, "--json"
    )
    assert code == 0
    assert json.loads(out)["model"]["build_millis"] is None

    updated = NGramModel.load(model_path)
    batch = build([tokenize_file(a), tokenize_file(b)], 2).model
    assert updated.table == batch.table
    assert updated.vocabulary == batch.vocabulary
    assert updated.count_of_counts == batch.count_of_counts


def test_update_with_out_keeps_original(ws, tmp_path, capsys):
    a = write(tmp_path / "a.txt", SENTENCE + "\n")
    b = write(tmp_path / "b.txt", SECOND + "\n")
    model_path = tmp_path / "m.gf"
    run_cli(capsys, "build", "--corpus", a, "--n", "2", "--out", str(model_path))
    before = model_path.read_bytes()
    out_path = tmp_path / "m2.gf"
    code, _, _ = run_cli(
        capsys,
        "update", "--model", str(model_path), "--corpus", b, "--out", str(out_path),
    )
    assert code == 0
    assert model_path.read_bytes() == before
    assert out_path.exists()


def test_prune_cli_reports_removed_contexts(ws, tmp_path, capsys):
    corpus = write(tmp_path / "c.txt", "a b a b a c\n")
    model_path = str(tmp_path / "m.gf")
    run_cli(capsys, "build", "--corpus", corpus, "--n", "2", "--out", model_path)
    code, out, _ = run_cli(
        capsys, "prune", "--model", model_path, "--threshold", "3", "--json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["removed_contexts"] == 1
    pruned = NGramModel.load(model_path)
    assert pruned.table == {"a": {"b": 2, "c": 1}}


def test_bench_emits_csv(ws, tmp_path, capsys):
    a = write(tmp_path / "a.txt", ("alpha beta gamma delta " * 40 + "\n") * 3)
    b = write(tmp_path / "b.txt", ("epsilon zeta eta theta " * 80 + "\n") * 3)
    code, out, err = run_cli(capsys, "bench", "--corpus", a, "--corpus", b)
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert all(len(line.split(",")) == 6 for line in lines[1:])


def test_bench_json_includes_records_and_csv(ws, tmp_path, capsys):
    a = write(tmp_path / "a.txt", "alpha beta gamma delta " * 50)
    code, out, _ = run_cli(capsys, "bench", "--corpus", a, "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["csv"].startswith(CSV_HEADER)
    record = payload["records"][0]
    assert record["corpus_path"] == a
    assert set(record["build_ms"]) == {"1", "2", "3", "4"}


def test_serve_startup_line_and_flags(ws, capsys, monkeypatch):
    calls = {}

    def fake_serve(port, host):
        calls["port"] = port
        calls["host"] = host

    import gramforge.service

    monkeypatch.setattr(gramforge.service, "serve", fake_serve)
    code, out, _ = run_cli(capsys, "serve", "--port", "8123", "--json")
    assert code == 0
    assert json.loads(out) == {
        "event": "serving", "host": "127.0.0.1", "port": 8123,
    }
    assert calls == {"port": 8123, "host": "127.0.0.1"}

    code, out, _ = run_cli(capsys, "serve", "--port", "8124", "--host", "0.0.0.0")
    assert code == 0
    assert out == "serving on http://0.0.0.0:8124\n"
    assert calls["port"] == 8124


def test_workspace_env_controls_layout(ws, tmp_path, capsys):
    corpus = write(tmp_path / "a.txt", SENTENCE + "\n")
    run_cli(capsys, "ingest", "--corpus", corpus)
    assert (ws / "corpus_store" / "manifest.json").exists()
    code, _, _ = run_cli(capsys, "build", "--n", "2")
    assert code == 0
    assert (ws / "model.gf").exists()
