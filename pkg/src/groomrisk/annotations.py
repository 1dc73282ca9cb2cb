"""Annotated chat corpora: parsing, context windowing, and risk aggregation.

A corpus is a line-delimited UTF-8 file, one JSON object per line, in one of
two schemas:

* context-level: ``{"context_id", "conversation_id", "group", "turn_index",
  "texts": [...], "speakers": [...], "strategies": {slug: 0|0.5|1}}``
* message-level: ``{"conversation_id", "group", "turn_index", "speaker",
  "text", "strategies": {slug: 0|0.5|1}}``

Unknown extra fields are preserved on read and ignored by computation.
Twelve manipulation strategies are annotated per record with fuzzy
memberships in {0, 0.5, 1}; a context's risk score is their sum.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import CorpusError, ParameterError

GROUPS = ("LEO", "Victim", "Decoy")
SPEAKERS = ("predator", "other")

STRATEGY_SLUGS = (
    "coercion",
    "bragging",
    "teaching",
    "image_request",
    "neg_physique",
    "neg_family",
    "compliments",
    "reverse_power",
    "sexual_history",
    "willingness",
    "roleplay",
    "secrecy",
)
N_STRATEGIES = len(STRATEGY_SLUGS)
ALLOWED_STRATEGY_VALUES = (0.0, 0.5, 1.0)
DEFAULT_WINDOW = 3

_SCHEMAS = ("context-level", "message-level")


@dataclass(frozen=True)
class StrategyVector:
    """Fuzzy memberships of the twelve strategies, in canonical slug order."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != N_STRATEGIES:
            raise ParameterError(
                f"strategy vector needs {N_STRATEGIES} entries, got {len(values)}"
            )
        for slug, v in zip(STRATEGY_SLUGS, values):
            if v not in ALLOWED_STRATEGY_VALUES:
                raise ParameterError(
                    f"strategy {slug!r} value outside {{0, 0.5, 1}}: {v}"
                )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls) -> "StrategyVector":
        return cls((0.0,) * N_STRATEGIES)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "StrategyVector":
        """Build from a {slug: value} mapping; missing slugs default to 0."""
        unknown = set(mapping) - set(STRATEGY_SLUGS)
        if unknown:
            raise ParameterError(f"unknown strategy slug {sorted(unknown)[0]!r}")
        for slug, v in mapping.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParameterError(
                    f"strategy {slug!r} value outside {{0, 0.5, 1}}: {v!r}"
                )
        return cls(tuple(float(mapping.get(slug, 0)) for slug in STRATEGY_SLUGS))

    def to_mapping(self) -> dict[str, float]:
        return dict(zip(STRATEGY_SLUGS, self.values))

    def value(self, slug: str) -> float:
        return self.values[STRATEGY_SLUGS.index(slug)]


@dataclass(frozen=True)
class ChatMessage:
    conversation_id: str
    group: str
    turn_index: int
    speaker: str
    text: str

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ParameterError(f"unknown group {self.group!r}")
        if self.speaker not in SPEAKERS:
            raise ParameterError(f"unknown speaker {self.speaker!r}")
        if isinstance(self.turn_index, bool) or not isinstance(self.turn_index, int):
            raise ParameterError(f"turn_index must be an integer, got {self.turn_index!r}")
        if self.turn_index < 0:
            raise ParameterError(f"turn_index must be >= 0, got {self.turn_index}")


@dataclass(frozen=True)
class ChatContext:
    """A window of up to ``window_size_n`` consecutive messages.

    The last message is the "current" one; ``context_id`` combines the
    conversation id with its turn index.
    """

    context_id: str
    messages: tuple[ChatMessage, ...]
    window_size_n: int = DEFAULT_WINDOW
    strategies: StrategyVector = field(default_factory=StrategyVector.zeros)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not 1 <= len(self.messages) <= self.window_size_n:
            raise ParameterError(
                f"context must hold 1..{self.window_size_n} messages, got {len(self.messages)}"
            )
        conv = self.messages[0].conversation_id
        group = self.messages[0].group
        last_turn = None
        for m in self.messages:
            if m.conversation_id != conv:
                raise ParameterError("context messages must share one conversation_id")
            if m.group != group:
                raise ParameterError("group must be constant within a conversation")
            if last_turn is not None and m.turn_index <= last_turn:
                raise ParameterError("message turn_index must be strictly increasing")
            last_turn = m.turn_index

    @property
    def conversation_id(self) -> str:
        return self.messages[-1].conversation_id

    @property
    def group(self) -> str:
        return self.messages[-1].group

    @property
    def turn_index(self) -> int:
        return self.messages[-1].turn_index

    @property
    def risk_score(self) -> float:
        return aggregate(self.strategies)


def aggregate(sv: StrategyVector) -> float:
    """Risk score of a context: the sum of its strategy memberships."""
    return float(sum(sv.values))


def combine_strategies(per_message: Iterable[StrategyVector]) -> StrategyVector:
    """Fuzzy union (element-wise max) of strategy vectors across a window."""
    vectors = list(per_message)
    if not vectors:
        raise ParameterError("combine_strategies needs a non-empty list")
    combined = vectors[0].values
    for sv in vectors[1:]:
        combined = tuple(max(a, b) for a, b in zip(combined, sv.values))
    return StrategyVector(combined)


def build_contexts(messages: Iterable[ChatMessage], n: int = DEFAULT_WINDOW) -> list[ChatContext]:
    """One context per message: that message plus up to n-1 predecessors.

    Messages must be sorted by (conversation_id, turn_index). Windows are
    truncated (not padded) at the start of each conversation and never cross
    conversation boundaries.
    """
    if n < 1:
        raise ParameterError(f"window size n must be >= 1, got {n}")
    contexts: list[ChatContext] = []
    window: list[ChatMessage] = []
    for msg in messages:
        if window and msg.conversation_id != window[-1].conversation_id:
            window = []
        if window and msg.turn_index <= window[-1].turn_index:
            raise ParameterError(
                f"messages not sorted: turn {msg.turn_index} after {window[-1].turn_index} "
                f"in conversation {msg.conversation_id!r}"
            )
        window.append(msg)
        window = window[-n:]
        contexts.append(ChatContext(
            context_id=f"{msg.conversation_id}:{msg.turn_index}",
            messages=tuple(window),
            window_size_n=n,
        ))
    return contexts


def contexts_from_messages(annotated: Iterable[tuple[ChatMessage, StrategyVector]],
                           n: int = DEFAULT_WINDOW) -> list[ChatContext]:
    """Window message-level annotations into contexts with fuzzy-union strategies."""
    pairs = list(annotated)
    by_key = {(m.conversation_id, m.turn_index): sv for m, sv in pairs}
    contexts = build_contexts([m for m, _ in pairs], n=n)
    return [
        replace(ctx, strategies=combine_strategies(
            [by_key[(m.conversation_id, m.turn_index)] for m in ctx.messages]))
        for ctx in contexts
    ]


def window_text(context: ChatContext) -> str:
    """Window surface text: one line per message, prefixed with its speaker role."""
    return "\n".join(f"{m.speaker}: {m.text}" for m in context.messages)


def _iter_lines(source) -> Iterator[tuple[int, str]]:
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from _iter_lines(fh)
        return
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if raw.strip():
            yield lineno, raw


def _get(record: dict, key: str, lineno: int):
    if key not in record:
        raise CorpusError(f"missing {key}", line=lineno)
    return record[key]


def _parse_strategies(record: dict, lineno: int) -> StrategyVector:
    raw = _get(record, "strategies", lineno)
    if not isinstance(raw, dict):
        raise CorpusError("strategies must be an object", line=lineno)
    try:
        return StrategyVector.from_mapping(raw)
    except ParameterError as exc:
        raise CorpusError(str(exc), line=lineno) from None


class _TurnMonotonyCheck:
    """Rejects non-increasing turn_index within a conversation."""

    def __init__(self):
        self.last: dict[str, int] = {}

    def check(self, conversation_id: str, turn_index: int, lineno: int):
        prev = self.last.get(conversation_id)
        if prev is not None and turn_index <= prev:
            raise CorpusError(
                f"non-monotone turn_index {turn_index} after {prev} "
                f"in conversation {conversation_id!r}", line=lineno)
        self.last[conversation_id] = turn_index


def _parse_context_record(record: dict, lineno: int, n: int) -> ChatContext:
    conv = _get(record, "conversation_id", lineno)
    group = _get(record, "group", lineno)
    turn = _get(record, "turn_index", lineno)
    texts = _get(record, "texts", lineno)
    speakers = _get(record, "speakers", lineno)
    context_id = _get(record, "context_id", lineno)
    if not isinstance(texts, list) or not isinstance(speakers, list):
        raise CorpusError("texts and speakers must be arrays", line=lineno)
    if len(texts) != len(speakers):
        raise CorpusError(
            f"texts ({len(texts)}) and speakers ({len(speakers)}) differ in length",
            line=lineno)
    if not 1 <= len(texts) <= n:
        raise CorpusError(f"window must hold 1..{n} messages, got {len(texts)}", line=lineno)
    if isinstance(turn, bool) or not isinstance(turn, int) or turn < 0:
        raise CorpusError(f"turn_index must be a non-negative integer, got {turn!r}", line=lineno)
    if len(texts) > turn + 1:
        raise CorpusError(
            f"window of {len(texts)} messages cannot end at turn_index {turn}", line=lineno)
    strategies = _parse_strategies(record, lineno)
    known = {"context_id", "conversation_id", "group", "turn_index",
             "texts", "speakers", "strategies"}
    extra = {k: v for k, v in record.items() if k not in known}
    first_turn = turn - len(texts) + 1
    try:
        messages = tuple(
            ChatMessage(conversation_id=conv, group=group, turn_index=first_turn + i,
                        speaker=spk, text=txt)
            for i, (txt, spk) in enumerate(zip(texts, speakers))
        )
        return ChatContext(context_id=context_id, messages=messages,
                           window_size_n=n, strategies=strategies, extra=extra)
    except ParameterError as exc:
        raise CorpusError(str(exc), line=lineno) from None


def _parse_message_record(record: dict, lineno: int) -> tuple[ChatMessage, StrategyVector]:
    strategies = _parse_strategies(record, lineno)
    try:
        msg = ChatMessage(
            conversation_id=_get(record, "conversation_id", lineno),
            group=_get(record, "group", lineno),
            turn_index=_get(record, "turn_index", lineno),
            speaker=_get(record, "speaker", lineno),
            text=_get(record, "text", lineno),
        )
    except ParameterError as exc:
        raise CorpusError(str(exc), line=lineno) from None
    return msg, strategies


def parse_corpus(source, schema: str = "context-level", n: int = DEFAULT_WINDOW):
    """Parse a line-delimited corpus.

    ``source`` may be a path, bytes, or a file object. Returns a list of
    :class:`ChatContext` for the context-level schema, or a list of
    ``(ChatMessage, StrategyVector)`` pairs for the message-level schema.
    Every validation error is raised as :class:`CorpusError` naming the
    offending line.
    """
    if schema not in _SCHEMAS:
        raise ParameterError(f"schema must be one of {_SCHEMAS}, got {schema!r}")
    if n < 1:
        raise ParameterError(f"window size n must be >= 1, got {n}")
    monotony = _TurnMonotonyCheck()
    group_of: dict[str, str] = {}
    out = []
    for lineno, line in _iter_lines(source):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON: {exc.msg}", line=lineno) from None
        if not isinstance(record, dict):
            raise CorpusError("record must be a JSON object", line=lineno)
        if schema == "context-level":
            item = _parse_context_record(record, lineno, n)
            conv, turn = item.conversation_id, item.turn_index
        else:
            item = _parse_message_record(record, lineno)
            conv, turn = item[0].conversation_id, item[0].turn_index
        group = item.group if isinstance(item, ChatContext) else item[0].group
        seen = group_of.setdefault(conv, group)
        if seen != group:
            raise CorpusError(
                f"group {group!r} conflicts with {seen!r} in conversation {conv!r}",
                line=lineno)
        monotony.check(conv, turn, lineno)
        out.append(item)
    return out


def context_to_record(context: ChatContext) -> dict:
    """Context-level record for one context, extra fields preserved."""
    record = {
        "context_id": context.context_id,
        "conversation_id": context.conversation_id,
        "group": context.group,
        "turn_index": context.turn_index,
        "texts": [m.text for m in context.messages],
        "speakers": [m.speaker for m in context.messages],
        "strategies": context.strategies.to_mapping(),
    }
    for key in sorted(context.extra):
        record[key] = context.extra[key]
    return record


def serialize_corpus(contexts: Iterable[ChatContext], target: IO[bytes] | None = None) -> bytes:
    """Serialize contexts to the context-level corpus format."""
    payload = b"".join(
        json.dumps(context_to_record(ctx), ensure_ascii=False).encode("utf-8") + b"\n"
        for ctx in contexts
    )
    if target is not None:
        target.write(payload)
    return payload
