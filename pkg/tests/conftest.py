"""Shared fixtures and corpus-building helpers."""

import json

import pytest

from groomrisk import (
    ChatContext,
    ChatMessage,
    StrategyVector,
    SynthConfig,
    generate,
    serialize_corpus,
)


def make_context(strategies=None, group="LEO", conv="conv-a", turn=0,
                 texts=("hello there",), speakers=None):
    """One context ending at ``turn``, with len(texts) window messages."""
    if speakers is None:
        speakers = tuple("predator" if (turn - len(texts) + 1 + i) % 2 else "other"
                         for i in range(len(texts)))
    first = turn - len(texts) + 1
    messages = tuple(
        ChatMessage(conversation_id=conv, group=group, turn_index=first + i,
                    speaker=spk, text=txt)
        for i, (txt, spk) in enumerate(zip(texts, speakers)))
    sv = StrategyVector.from_mapping(strategies or {})
    return ChatContext(context_id=f"{conv}:{turn}", messages=messages,
                       strategies=sv)


def corpus_record(context_id="conv-a:0", conversation_id="conv-a", group="LEO",
                  turn_index=0, texts=("hello there",), speakers=("other",),
                  strategies=None, **extra):
    record = {
        "context_id": context_id,
        "conversation_id": conversation_id,
        "group": group,
        "turn_index": turn_index,
        "texts": list(texts),
        "speakers": list(speakers),
        "strategies": strategies or {},
    }
    record.update(extra)
    return record


def corpus_bytes(*records) -> bytes:
    return b"".join(json.dumps(r).encode("utf-8") + b"\n" for r in records)


@pytest.fixture(scope="session")
def small_synth_contexts():
    """A small deterministic corpus covering all groups."""
    return generate(SynthConfig(seed=11, conversations_per_group=8))


@pytest.fixture(scope="session")
def small_synth_corpus(small_synth_contexts):
    return serialize_corpus(small_synth_contexts)
