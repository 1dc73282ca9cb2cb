"""Synthetic corpus generation: determinism, planted cues, exact labels."""

import pytest

from groomrisk import (
    GROUPS,
    ParameterError,
    STRATEGY_SLUGS,
    SynthConfig,
    generate,
    parse_corpus,
    serialize_corpus,
    window_text,
)
from groomrisk.synthgen import DEFAULT_CUE_LEXICONS, weak_cue


def test_generation_is_deterministic():
    cfg = SynthConfig(seed=5, conversations_per_group=6)
    assert serialize_corpus(generate(cfg)) == serialize_corpus(generate(cfg))
    other = SynthConfig(seed=6, conversations_per_group=6)
    assert serialize_corpus(generate(cfg)) != serialize_corpus(generate(other))


def test_labels_equal_planted_sums(small_synth_contexts):
    for ctx in small_synth_contexts:
        assert ctx.risk_score == sum(ctx.strategies.values)


def test_planted_cues_appear_in_window_text(small_synth_contexts):
    for ctx in small_synth_contexts:
        text = window_text(ctx)
        for slug in STRATEGY_SLUGS:
            value = ctx.strategies.value(slug)
            if value == 0.0:
                continue
            phrases = DEFAULT_CUE_LEXICONS[slug]
            if value == 1.0:
                assert any(p in text for p in phrases), (ctx.context_id, slug)
            else:
                assert any(weak_cue(p) in text for p in phrases), (ctx.context_id, slug)


def test_density_zero_yields_all_zero_labels():
    contexts = generate(SynthConfig(seed=1, conversations_per_group=5,
                                    strategy_density=0.0))
    assert contexts
    assert all(ctx.risk_score == 0.0 for ctx in contexts)


def test_density_one_without_partials_yields_label_twelve():
    contexts = generate(SynthConfig(seed=1, conversations_per_group=3,
                                    strategy_density=1.0, partial_probability=0.0))
    assert all(ctx.risk_score == 12.0 for ctx in contexts)


def test_generated_corpus_parses_and_round_trips():
    contexts = generate(SynthConfig(seed=3, conversations_per_group=4))
    blob = serialize_corpus(contexts)
    assert parse_corpus(blob) == contexts


def test_all_groups_emitted_with_own_conversations():
    contexts = generate(SynthConfig(seed=2, conversations_per_group=3))
    for group in GROUPS:
        convs = {c.conversation_id for c in contexts if c.group == group}
        assert len(convs) == 3
        assert all(conv.startswith(group.lower() + "-") for conv in convs)


def test_window_shape_and_speaker_parity():
    contexts = generate(SynthConfig(seed=4, conversations_per_group=4))
    for ctx in contexts:
        assert 1 <= len(ctx.messages) <= 3
        assert len(ctx.messages) == min(3, ctx.turn_index + 1)
        for m in ctx.messages:
            assert m.speaker == ("predator" if m.turn_index % 2 else "other")


def test_turn_counts_respect_configured_range():
    cfg = SynthConfig(seed=9, conversations_per_group=10,
                      turns_per_conversation=(2, 4))
    contexts = generate(cfg)
    per_conv = {}
    for ctx in contexts:
        per_conv[ctx.conversation_id] = max(
            per_conv.get(ctx.conversation_id, 0), ctx.turn_index + 1)
    assert all(2 <= n <= 4 for n in per_conv.values())


def test_zero_conversations_gives_empty_corpus():
    assert generate(SynthConfig(conversations_per_group=0)) == []


@pytest.mark.parametrize("kwargs", [
    {"strategy_density": 1.5},
    {"strategy_density": -0.1},
    {"partial_probability": 2.0},
    {"conversations_per_group": -1},
    {"turns_per_conversation": (0, 4)},
    {"turns_per_conversation": (5, 2)},
    {"seed": "abc"},
    {"strategy_cue_lexicons": {"coercion": ("only one slug covered",)}},
    {"strategy_cue_lexicons": dict(DEFAULT_CUE_LEXICONS, extra_slug=("x",))},
])
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        SynthConfig(**kwargs)


def test_config_dict_round_trip():
    cfg = SynthConfig(seed=42, conversations_per_group=7, strategy_density=0.4)
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ParameterError, match="unknown synth config keys"):
        SynthConfig.from_dict({"seeds": 1})


def test_every_slug_has_default_cues():
    assert set(DEFAULT_CUE_LEXICONS) == set(STRATEGY_SLUGS)
    assert all(len(v) >= 1 for v in DEFAULT_CUE_LEXICONS.values())
