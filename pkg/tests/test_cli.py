"""Subcommand behavior, exit codes, and run-config handling."""

import json

import numpy as np
import pytest

from groomrisk import (
    EmbeddingFeatureSpec,
    FuzzyConfig,
    HashFeatureSpec,
    LinearModel,
    RunConfig,
    load_run_config,
    parse_corpus,
    save_model,
)
from groomrisk.cli import main
from groomrisk.config import run_config_from_dict
from groomrisk.errors import ParameterError


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture()
def corpus_path(tmp_path):
    path = tmp_path / "corpus.jsonl"
    code = run_cli("synth", "--out", str(path), "--seed", "13", "--per-group", "4")
    assert code == 0
    return path


# ---------------------------------------------------------------- synth


def test_synth_writes_corpus_and_meta(tmp_path, corpus_path):
    assert corpus_path.exists()
    meta = json.loads((tmp_path / "corpus.jsonl.meta.json").read_text())
    assert meta["synth"]["seed"] == 13
    assert meta["synth"]["conversations_per_group"] == 4
    contexts = parse_corpus(corpus_path)
    assert len({c.group for c in contexts}) == 3


def test_synth_is_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run_cli("synth", "--out", str(a), "--seed", "42", "--per-group", "3") == 0
    assert run_cli("synth", "--out", str(b), "--seed", "42", "--per-group", "3") == 0
    assert a.read_bytes() == b.read_bytes()


def test_synth_zero_per_group_writes_empty_corpus(tmp_path):
    out = tmp_path / "empty.jsonl"
    assert run_cli("synth", "--out", str(out), "--per-group", "0") == 0
    assert out.read_bytes() == b""


def test_synth_density_zero_scores_all_moderate(tmp_path, capsys):
    out = tmp_path / "zero.jsonl"
    assert run_cli("synth", "--out", str(out), "--per-group", "2",
                   "--density", "0") == 0
    capsys.readouterr()
    assert run_cli("score", "--corpus", str(out)) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert rows
    assert all(row.split(",")[1] == "0" and row.endswith("Moderate") for row in rows)


def test_synth_rejects_bad_density(tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli("synth", "--out", str(tmp_path / "x.jsonl"), "--density", "1.2")
    assert err.value.code == 2


# ---------------------------------------------------------------- score


def test_score_reports_memberships_and_category(corpus_path, capsys):
    assert run_cli("score", "--corpus", str(corpus_path)) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "context_id,r_groom,mu_moderate,mu_significant,mu_severe,category"
    assert len(lines) == 1 + len(parse_corpus(corpus_path))
    first = lines[1].split(",")
    assert len(first) == 6
    assert first[5] in ("Moderate", "Significant", "Severe")


def test_score_empty_corpus_prints_header_only(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_bytes(b"")
    assert run_cli("score", "--corpus", str(empty)) == 0
    assert capsys.readouterr().out.strip().splitlines() == [
        "context_id,r_groom,mu_moderate,mu_significant,mu_severe,category"]


def test_score_alpha_out_of_range_exits_2(corpus_path, capsys):
    with pytest.raises(SystemExit) as err:
        run_cli("score", "--corpus", str(corpus_path), "--alpha", "1.5")
    assert err.value.code == 2
    assert "alpha must be in (0,1]" in capsys.readouterr().err


def test_score_malformed_corpus_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"context_id": "x"}\n')
    assert run_cli("score", "--corpus", str(bad)) == 1
    assert "line 1" in capsys.readouterr().err


def test_score_defuzz_mode_flag_changes_categories(corpus_path, capsys):
    # alpha-highest under the shoulder default never lands on Moderate
    assert run_cli("score", "--corpus", str(corpus_path),
                   "--defuzz-mode", "alpha-highest") == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert all(not row.endswith("Moderate") for row in rows)


# ---------------------------------------------------------------- train


def test_train_writes_per_group_models(tmp_path, corpus_path, capsys):
    out = tmp_path / "model.json"
    assert run_cli("train", "--corpus", str(corpus_path), "--out", str(out),
                   "--epochs", "2") == 0
    printed = capsys.readouterr().out
    for group in ("LEO", "Victim", "Decoy"):
        assert (tmp_path / f"model.{group}.json").exists()
        assert f"{group} epoch 1/2 loss" in printed
    assert not out.exists()


def test_train_rerun_is_bit_identical(tmp_path, corpus_path):
    first = tmp_path / "m1.json"
    second = tmp_path / "m2.json"
    for out in (first, second):
        assert run_cli("train", "--corpus", str(corpus_path), "--pooled",
                       "--out", str(out), "--epochs", "2", "--seed", "7") == 0
    assert first.read_bytes() == second.read_bytes()


def test_train_epochs_zero_exits_2(tmp_path, corpus_path):
    with pytest.raises(SystemExit) as err:
        run_cli("train", "--corpus", str(corpus_path),
                "--out", str(tmp_path / "m.json"), "--epochs", "0")
    assert err.value.code == 2


def test_train_embeddings_without_file_exits_2(tmp_path, corpus_path):
    with pytest.raises(SystemExit) as err:
        run_cli("train", "--corpus", str(corpus_path), "--features", "embeddings",
                "--out", str(tmp_path / "m.json"))
    assert err.value.code == 2


def test_train_missing_embeddings_exit_1_and_list_ids(tmp_path, corpus_path, capsys):
    contexts = parse_corpus(corpus_path)
    table = [{"context_id": c.context_id, "vector": [float(c.risk_score), 1.0]}
             for c in contexts[:-2]]
    emb = tmp_path / "emb.jsonl"
    emb.write_text("\n".join(json.dumps(r) for r in table) + "\n")
    code = run_cli("train", "--corpus", str(corpus_path), "--pooled",
                   "--features", "embeddings", "--embeddings", str(emb),
                   "--out", str(tmp_path / "m.json"))
    assert code == 1
    err = capsys.readouterr().err
    assert "missing embeddings" in err
    assert contexts[-1].context_id in err


def test_train_on_embeddings_end_to_end(tmp_path, corpus_path, capsys):
    contexts = parse_corpus(corpus_path)
    emb = tmp_path / "emb.jsonl"
    emb.write_text("\n".join(
        json.dumps({"context_id": c.context_id,
                    "vector": [float(c.risk_score), 1.0]})
        for c in contexts) + "\n")
    model_path = tmp_path / "m.json"
    assert run_cli("train", "--corpus", str(corpus_path), "--pooled",
                   "--features", "embeddings", "--embeddings", str(emb),
                   "--out", str(model_path), "--epochs", "3") == 0
    capsys.readouterr()
    assert run_cli("eval", "--corpus", str(corpus_path), "--model",
                   str(model_path), "--embeddings", str(emb)) == 0
    assert "Overall" in capsys.readouterr().out


# ---------------------------------------------------------------- eval


def write_oracle_model(tmp_path, corpus):
    """A model that returns each context's actual score: embedding features
    [r_groom, 1] with weights [1, 0]."""
    contexts = parse_corpus(corpus)
    emb = tmp_path / "oracle-emb.jsonl"
    emb.write_text("\n".join(
        json.dumps({"context_id": c.context_id,
                    "vector": [float(c.risk_score), 1.0]})
        for c in contexts) + "\n")
    model = LinearModel(weights=np.array([1.0, 0.0]), bias=0.0,
                        feature_spec=EmbeddingFeatureSpec(dimension=2),
                        train_meta={"trained_on": "pooled", "config": None})
    path = tmp_path / "oracle.json"
    save_model(model, path)
    return path, emb


def test_eval_perfect_oracle_has_zero_mse(tmp_path, corpus_path, capsys):
    model_path, emb = write_oracle_model(tmp_path, corpus_path)
    report_path = tmp_path / "report.json"
    assert run_cli("eval", "--corpus", str(corpus_path), "--model", str(model_path),
                   "--embeddings", str(emb), "--format", "json",
                   "--report", str(report_path)) == 0
    report = json.loads(report_path.read_text())
    for group in report["groups"].values():
        if group["overall"]["count"]:
            assert group["overall"]["mse"] == 0.0


def test_eval_rerun_emits_identical_bytes(tmp_path, corpus_path):
    model_path, emb = write_oracle_model(tmp_path, corpus_path)
    a, b = tmp_path / "r1.txt", tmp_path / "r2.txt"
    for path in (a, b):
        assert run_cli("eval", "--corpus", str(corpus_path), "--model",
                       str(model_path), "--embeddings", str(emb),
                       "--report", str(path)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_eval_single_group_corpus_reports_other_columns_empty(tmp_path, capsys):
    corpus = tmp_path / "leo.jsonl"
    assert run_cli("synth", "--out", str(corpus), "--per-group", "3") == 0
    contexts = [c for c in parse_corpus(corpus) if c.group == "LEO"]
    from groomrisk import serialize_corpus
    corpus.write_bytes(serialize_corpus(contexts))
    model_path, emb = write_oracle_model(tmp_path, corpus)
    capsys.readouterr()
    assert run_cli("eval", "--corpus", str(corpus), "--model", str(model_path),
                   "--embeddings", str(emb)) == 0
    table = capsys.readouterr().out
    overall = [l for l in table.splitlines() if l.startswith("Overall")][0]
    assert overall.count("- (n=0)") == 2


def test_eval_uncovered_group_exits_1(tmp_path, corpus_path, capsys):
    out = tmp_path / "model.json"
    assert run_cli("train", "--corpus", str(corpus_path), "--out", str(out),
                   "--epochs", "1") == 0
    leo_model = tmp_path / "model.LEO.json"
    code = run_cli("eval", "--corpus", str(corpus_path), "--model", str(leo_model))
    assert code == 1
    assert "no model covers group" in capsys.readouterr().err


def test_eval_by_group_rejects_pooled_fallback(tmp_path, corpus_path, capsys):
    model_path, emb = write_oracle_model(tmp_path, corpus_path)
    code = run_cli("eval", "--corpus", str(corpus_path), "--model", str(model_path),
                   "--embeddings", str(emb), "--by-group")
    assert code == 1
    assert "no model covers group" in capsys.readouterr().err


def test_eval_routes_groups_to_their_models(tmp_path, corpus_path, capsys):
    assert run_cli("train", "--corpus", str(corpus_path),
                   "--out", str(tmp_path / "model.json"), "--epochs", "1") == 0
    capsys.readouterr()
    models = [str(tmp_path / f"model.{g}.json") for g in ("LEO", "Victim", "Decoy")]
    assert run_cli("eval", "--corpus", str(corpus_path), "--model", *models,
                   "--by-group", "--format", "csv") == 0
    out = capsys.readouterr().out
    assert sum(1 for l in out.splitlines() if l and not l.startswith("#")) == 13


def test_eval_dimension_mismatch_exits_1(tmp_path, corpus_path, capsys):
    model_path, _ = write_oracle_model(tmp_path, corpus_path)
    bad_emb = tmp_path / "bad-emb.jsonl"
    bad_emb.write_text("\n".join(
        json.dumps({"context_id": c.context_id, "vector": [1.0, 2.0, 3.0]})
        for c in parse_corpus(corpus_path)) + "\n")
    code = run_cli("eval", "--corpus", str(corpus_path), "--model", str(model_path),
                   "--embeddings", str(bad_emb))
    assert code == 1
    assert "dimension" in capsys.readouterr().err


def test_eval_unknown_format_exits_2(tmp_path, corpus_path):
    with pytest.raises(SystemExit) as err:
        run_cli("eval", "--corpus", str(corpus_path), "--model", "x.json",
                "--format", "xml")
    assert err.value.code == 2


# ---------------------------------------------------------------- config


def test_run_config_sections_and_overrides(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({
        "fuzzy": {"defuzz_mode": "alpha-highest"},
        "synth": {"conversations_per_group": 2, "strategy_density": 0.0},
        "train": {"epochs": 1},
    }))
    out = tmp_path / "c.jsonl"
    assert run_cli("synth", "--out", str(out), "--config", str(cfg_path)) == 0
    contexts = parse_corpus(out)
    assert {c.conversation_id for c in contexts if c.group == "LEO"} == \
        {"leo-0000", "leo-0001"}
    assert all(c.risk_score == 0.0 for c in contexts)
    # flag overrides the file value
    assert run_cli("synth", "--out", str(out), "--config", str(cfg_path),
                   "--per-group", "1") == 0
    assert len({c.conversation_id for c in parse_corpus(out)}) == 3


def test_config_env_var_fallback(tmp_path, monkeypatch):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({"synth": {"conversations_per_group": 1}}))
    monkeypatch.setenv("GROOMRISK_CONFIG", str(cfg_path))
    cfg = load_run_config()
    assert cfg.synth.conversations_per_group == 1
    monkeypatch.delenv("GROOMRISK_CONFIG")
    assert load_run_config().synth.conversations_per_group == 50


def test_config_rejects_unknown_sections():
    with pytest.raises(ParameterError, match="unknown config sections"):
        run_config_from_dict({"fuzz": {}})
    with pytest.raises(ParameterError, match="unknown fuzzy config keys"):
        run_config_from_dict({"fuzzy": {"mean": [0, 1, 2]}})


def test_config_features_section():
    cfg = run_config_from_dict({"features": {"kind": "hash", "dimension": 1024}})
    assert isinstance(cfg.features, HashFeatureSpec)
    assert cfg.features.dimension == 1024
    emb = run_config_from_dict({"features": {"kind": "embeddings", "dimension": 8}})
    assert isinstance(emb.features, EmbeddingFeatureSpec)


def test_run_config_to_dict_round_trip():
    cfg = RunConfig(fuzzy=FuzzyConfig(alpha=0.4))
    echoed = run_config_from_dict(cfg.to_dict())
    assert echoed == cfg


def test_bad_config_file_exits_2(tmp_path):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text("{not json")
    with pytest.raises(SystemExit) as err:
        run_cli("synth", "--out", str(tmp_path / "c.jsonl"), "--config", str(cfg_path))
    assert err.value.code == 2
