"""Round-trip between the frontend embedding exporter and this package:
exporter output must load cleanly, keep corpus order, and train a model
that predicts without dimension errors."""

import json
import shutil
import subprocess
from pathlib import Path

import pytest

import groomrisk as gr

REPO = Path(__file__).resolve().parent.parent
EXPORTER = REPO / "frontend" / "dist" / "cli.js"
FIXTURE = REPO / "frontend" / "fixtures" / "corpus-10.jsonl"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not EXPORTER.exists(),
    reason="exporter not built; run npm run build in frontend/",
)


def run_exporter(out_path, *extra):
    return subprocess.run(
        ["node", str(EXPORTER), "export", "--corpus", str(FIXTURE),
         "--model", "hashed-projection", "--out", str(out_path), *extra],
        capture_output=True, text=True)


def test_exporter_round_trip(tmp_path):
    out = tmp_path / "embeddings.jsonl"
    proc = run_exporter(out)
    assert proc.returncode == 0, proc.stderr

    embeddings = gr.load_embeddings(out)
    corpus_ids = [json.loads(line)["context_id"]
                  for line in FIXTURE.read_text().splitlines() if line]
    ok_order = list(embeddings) == corpus_ids
    dims = {fv.dimension for fv in embeddings.values()}
    ok_dims = len(dims) == 1

    contexts = gr.parse_corpus(FIXTURE)
    spec = gr.EmbeddingFeatureSpec(dimension=dims.pop())
    model = gr.train([(c, c.risk_score) for c in contexts], spec,
                     gr.TrainConfig(epochs=2), embeddings=embeddings)
    preds = [gr.predict(model, embeddings[c.context_id]) for c in contexts]
    ok_preds = len(preds) == len(contexts)

    ok = ok_order and ok_dims and ok_preds
    print(f"[acceptance] exporter-round-trip: {'PASS' if ok else 'FAIL'}")
    assert ok_order, "embedding ids must match corpus order"
    assert ok_dims, "vector dimension must be uniform"
    assert ok_preds


def test_exporter_output_is_deterministic(tmp_path):
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    assert run_exporter(first).returncode == 0
    assert run_exporter(second).returncode == 0
    assert first.read_bytes() == second.read_bytes()


def test_exporter_joins_window_text_like_the_feature_extractor(tmp_path):
    """The exporter must see the same surface text the hashing featurizer
    sees. A two-message window and a one-message window whose joined
    "speaker: text" strings are equal must embed to the same vector."""
    base = {"conversation_id": "c", "group": "LEO", "strategies": {}}
    one = {**base, "context_id": "c:0", "turn_index": 0,
           "texts": ["hello there\npredator: hi back"],
           "speakers": ["other"]}
    two = {**base, "context_id": "c:1", "turn_index": 1,
           "texts": ["hello there", "hi back"],
           "speakers": ["other", "predator"]}
    corpus = tmp_path / "mini.jsonl"
    corpus.write_text(json.dumps(one) + "\n" + json.dumps(two) + "\n")

    ctx_one, ctx_two = gr.parse_corpus(corpus)
    assert gr.window_text(ctx_two) == gr.window_text(ctx_one)

    out = tmp_path / "emb.jsonl"
    proc = subprocess.run(
        ["node", str(EXPORTER), "export", "--corpus", str(corpus),
         "--model", "hashed-projection", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    vectors = [json.loads(line)["vector"]
               for line in out.read_text().splitlines()]
    assert vectors[0] == vectors[1]
