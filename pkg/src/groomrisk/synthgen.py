"""Seeded synthetic corpora with planted strategy cues.

Real annotated grooming conversations are sensitive and cannot ship with
the toolkit, so end-to-end tests run on synthetic chats instead. Each
context is filler text in a group-specific vocabulary; every planted
strategy drops a fixed cue phrase (an innocuous placeholder, not grooming
language) into the window, so the label equals the sum of planted values
by construction and a linear model over hashed n-grams can recover it.

A strategy planted at 0.5 uses the weak cue variant: the same phrase
prefixed with "faintly". Window texts are sampled independently per
context rather than shared along the conversation, keeping each label
explained entirely by its own window.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .annotations import (
    DEFAULT_WINDOW,
    GROUPS,
    STRATEGY_SLUGS,
    ChatContext,
    ChatMessage,
    StrategyVector,
)
from .errors import ParameterError

WEAK_CUE_PREFIX = "faintly"

# One unique marker word per strategy keeps cue n-grams disjoint from the
# filler vocabulary and from each other.
DEFAULT_CUE_LEXICONS: dict[str, tuple[str, ...]] = {
    "coercion": ("maroon lantern tilts", "maroon compass hums"),
    "bragging": ("cobalt trophy gleams", "cobalt banner waves"),
    "teaching": ("sienna ledger opens", "sienna chalk taps"),
    "image_request": ("viridian frame waits", "viridian easel stands"),
    "neg_physique": ("umber mirror leans", "umber scale wobbles"),
    "neg_family": ("ochre hearth cools", "ochre fence sags"),
    "compliments": ("cerulean ribbon shines", "cerulean medal glints"),
    "reverse_power": ("crimson anchor drags", "crimson rudder swings"),
    "sexual_history": ("saffron archive creaks", "saffron scroll unrolls"),
    "willingness": ("indigo gate swings", "indigo latch clicks"),
    "roleplay": ("magenta mask slips", "magenta curtain lifts"),
    "secrecy": ("charcoal vault shuts", "charcoal drawer locks"),
}

_FILLER_VOCAB: dict[str, tuple[str, ...]] = {
    "LEO": ("report", "case", "review", "record", "note", "interview",
            "statement", "officer", "unit", "file", "update", "summary"),
    "Victim": ("school", "homework", "game", "friend", "bus", "lunch",
               "music", "class", "weekend", "movie", "team", "practice"),
    "Decoy": ("hello", "chat", "talk", "today", "later", "maybe",
              "sure", "okay", "thinking", "write", "message", "online"),
}


@dataclass(frozen=True)
class SynthConfig:
    """Generation parameters. Each strategy is planted independently with
    probability ``strategy_density``; a planted strategy is weak (0.5)
    with probability ``partial_probability``, else full (1)."""

    seed: int = 0
    conversations_per_group: int = 50
    turns_per_conversation: tuple[int, int] = (3, 6)
    strategy_cue_lexicons: Mapping[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_CUE_LEXICONS))
    strategy_density: float = 0.25
    partial_probability: float = 0.3

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ParameterError(f"seed must be an integer, got {self.seed!r}")
        if self.conversations_per_group < 0:
            raise ParameterError(
                f"conversations_per_group must be >= 0, got {self.conversations_per_group}")
        lo, hi = self.turns_per_conversation
        if not (isinstance(lo, int) and isinstance(hi, int) and 1 <= lo <= hi):
            raise ParameterError(
                f"turns_per_conversation must be an integer range with "
                f"1 <= lo <= hi, got {self.turns_per_conversation!r}")
        object.__setattr__(self, "turns_per_conversation", (lo, hi))
        for name in ("strategy_density", "partial_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1], got {p}")
        lexicons = {slug: tuple(phrases)
                    for slug, phrases in self.strategy_cue_lexicons.items()}
        unknown = set(lexicons) - set(STRATEGY_SLUGS)
        if unknown:
            raise ParameterError(f"unknown strategy slug {sorted(unknown)[0]!r}")
        for slug in STRATEGY_SLUGS:
            phrases = lexicons.get(slug, ())
            if not phrases or any(not str(p).strip() for p in phrases):
                raise ParameterError(f"strategy {slug!r} needs at least one cue phrase")
        object.__setattr__(self, "strategy_cue_lexicons", lexicons)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "conversations_per_group": self.conversations_per_group,
            "turns_per_conversation": list(self.turns_per_conversation),
            "strategy_cue_lexicons": {slug: list(phrases) for slug, phrases
                                      in self.strategy_cue_lexicons.items()},
            "strategy_density": self.strategy_density,
            "partial_probability": self.partial_probability,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown synth config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "turns_per_conversation" in kwargs:
            kwargs["turns_per_conversation"] = tuple(kwargs["turns_per_conversation"])
        return cls(**kwargs)


def weak_cue(phrase: str) -> str:
    """Cue variant planted when a strategy's value is 0.5."""
    return f"{WEAK_CUE_PREFIX} {phrase}"


def generate(cfg: SynthConfig) -> list[ChatContext]:
    """Generate contexts for all three groups, deterministically from the seed.

    Conversations are generated group by group; each turn yields one context
    whose window holds up to three messages with strictly increasing turn
    indices (truncated at the conversation start). Speakers alternate, the
    predator taking odd turns.
    """
    rng = random.Random(cfg.seed)
    lo, hi = cfg.turns_per_conversation
    contexts: list[ChatContext] = []
    for group in GROUPS:
        vocab = _FILLER_VOCAB[group]
        for conv_i in range(cfg.conversations_per_group):
            conv_id = f"{group.lower()}-{conv_i:04d}"
            n_turns = rng.randint(lo, hi)
            for turn in range(n_turns):
                wsize = min(DEFAULT_WINDOW, turn + 1)
                first = turn - wsize + 1
                texts = [" ".join(rng.choices(vocab, k=rng.randint(4, 8)))
                         for _ in range(wsize)]
                planted: dict[str, float] = {}
                for slug in STRATEGY_SLUGS:
                    if rng.random() >= cfg.strategy_density:
                        continue
                    value = 0.5 if rng.random() < cfg.partial_probability else 1.0
                    phrase = rng.choice(cfg.strategy_cue_lexicons[slug])
                    cue = weak_cue(phrase) if value == 0.5 else phrase
                    slot = rng.randrange(wsize)
                    texts[slot] = f"{texts[slot]} {cue}"
                    planted[slug] = value
                messages = tuple(
                    ChatMessage(conversation_id=conv_id, group=group,
                                turn_index=first + i,
                                speaker="predator" if (first + i) % 2 else "other",
                                text=texts[i])
                    for i in range(wsize))
                contexts.append(ChatContext(
                    context_id=f"{conv_id}:{turn}",
                    messages=messages,
                    window_size_n=DEFAULT_WINDOW,
                    strategies=StrategyVector.from_mapping(planted)))
    return contexts
