"""Feature extraction for the risk regressor.

Two feature spaces are supported behind one vector type:

* hashed n-grams - lowercase whitespace tokens of the speaker-prefixed
  window text, word unigrams and bigrams, signed feature hashing with
  64-bit FNV-1a (index = hash mod dimension, sign from the top bit).
* precomputed embeddings - dense vectors supplied per context_id in a
  line-delimited file ``{"context_id": ..., "vector": [...]}``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotations import ChatContext, window_text
from .errors import CorpusError, ParameterError

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1

DEFAULT_HASH_DIMENSION = 2 ** 18


def fnv1a64(data: bytes, seed: int = 0) -> int:
    """64-bit FNV-1a. A non-zero seed perturbs the offset basis."""
    h = FNV64_OFFSET ^ (seed & _U64)
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _U64
    return h


@dataclass(frozen=True)
class HashFeatureSpec:
    """Signed hashed n-gram feature space."""

    ngram_orders: tuple[int, ...] = (1, 2)
    dimension: int = DEFAULT_HASH_DIMENSION
    seed: int = 0
    kind: str = "hash"

    def __post_init__(self):
        object.__setattr__(self, "ngram_orders", tuple(int(k) for k in self.ngram_orders))
        if self.kind != "hash":
            raise ParameterError("HashFeatureSpec kind must be 'hash'")
        if not self.ngram_orders or any(k < 1 for k in self.ngram_orders):
            raise ParameterError(f"ngram orders must be >= 1, got {self.ngram_orders}")
        if self.dimension < 1:
            raise ParameterError(f"dimension must be >= 1, got {self.dimension}")

    def to_dict(self) -> dict:
        return {"kind": "hash", "ngram_orders": list(self.ngram_orders),
                "dimension": self.dimension, "seed": self.seed}


@dataclass(frozen=True)
class EmbeddingFeatureSpec:
    """Dense feature space fed from an external embedding file."""

    dimension: int
    kind: str = "embeddings"

    def __post_init__(self):
        if self.kind != "embeddings":
            raise ParameterError("EmbeddingFeatureSpec kind must be 'embeddings'")
        if self.dimension < 1:
            raise ParameterError(f"dimension must be >= 1, got {self.dimension}")

    def to_dict(self) -> dict:
        return {"kind": "embeddings", "dimension": self.dimension}


FeatureSpec = HashFeatureSpec | EmbeddingFeatureSpec


def feature_spec_from_dict(data: dict) -> FeatureSpec:
    kind = data.get("kind")
    if kind == "hash":
        return HashFeatureSpec(
            ngram_orders=tuple(data.get("ngram_orders", (1, 2))),
            dimension=int(data.get("dimension", DEFAULT_HASH_DIMENSION)),
            seed=int(data.get("seed", 0)),
        )
    if kind == "embeddings":
        if "dimension" not in data:
            raise ParameterError("embeddings feature spec needs a dimension")
        return EmbeddingFeatureSpec(dimension=int(data["dimension"]))
    raise ParameterError(f"unknown feature spec kind {kind!r}")


class FeatureVector:
    """A sparse or dense feature vector over a fixed dimension.

    Stored uniformly as (indices, values); dense inputs keep every index.
    All values must be finite.
    """

    __slots__ = ("dimension", "indices", "values")

    def __init__(self, dimension: int, indices, values):
        if dimension < 1:
            raise ParameterError(f"dimension must be >= 1, got {dimension}")
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if indices.shape != values.shape or indices.ndim != 1:
            raise ParameterError("indices and values must be 1-d arrays of equal length")
        if indices.size and (indices.min() < 0 or indices.max() >= dimension):
            raise ParameterError("feature index out of range")
        if not np.all(np.isfinite(values)):
            raise ParameterError("feature values must be finite")
        self.dimension = int(dimension)
        self.indices = indices
        self.values = values

    @classmethod
    def from_dense(cls, array) -> "FeatureVector":
        array = np.asarray(array, dtype=np.float64)
        return cls(array.size, np.arange(array.size, dtype=np.int64), array)

    @classmethod
    def from_counts(cls, counts: dict[int, float], dimension: int) -> "FeatureVector":
        items = sorted(counts.items())
        return cls(dimension,
                   np.array([i for i, _ in items], dtype=np.int64),
                   np.array([v for _, v in items], dtype=np.float64))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dimension, dtype=np.float64)
        np.add.at(out, self.indices, self.values)
        return out

    def dot(self, weights: np.ndarray) -> float:
        return float(weights[self.indices] @ self.values)

    def __eq__(self, other):
        return (isinstance(other, FeatureVector)
                and self.dimension == other.dimension
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))


def _ngrams(tokens: list[str], orders: tuple[int, ...]) -> list[str]:
    grams = []
    for k in orders:
        if k == 1:
            grams.extend(tokens)
        else:
            grams.extend(" ".join(tokens[i:i + k]) for i in range(len(tokens) - k + 1))
    return grams


def extract_features(context: ChatContext, spec: HashFeatureSpec) -> FeatureVector:
    """Hashed n-gram features of a context's speaker-prefixed window text.

    Deterministic: identical text and spec always hash to the same vector.
    Empty text yields the zero vector.
    """
    if not isinstance(spec, HashFeatureSpec):
        raise ParameterError("extract_features requires a hash feature spec")
    tokens = window_text(context).lower().split()
    counts: dict[int, float] = {}
    for gram in _ngrams(tokens, spec.ngram_orders):
        h = fnv1a64(gram.encode("utf-8"), seed=spec.seed)
        index = h % spec.dimension
        sign = -1.0 if h >> 63 else 1.0
        counts[index] = counts.get(index, 0.0) + sign
    return FeatureVector.from_counts(counts, spec.dimension)


def load_embeddings(source) -> dict[str, FeatureVector]:
    """Load an embedding file into {context_id: dense FeatureVector}.

    All vectors must share one dimension and every context_id must be
    unique; violations are reported with their line number. Insertion
    order follows the file.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_embeddings(fh)
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    out: dict[str, FeatureVector] = {}
    dimension = None
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON: {exc.msg}", line=lineno) from None
        if not isinstance(record, dict) or "context_id" not in record or "vector" not in record:
            raise CorpusError("record needs context_id and vector", line=lineno)
        context_id = record["context_id"]
        vector = record["vector"]
        if not isinstance(vector, list) or not vector:
            raise CorpusError("vector must be a non-empty array", line=lineno)
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in vector):
            raise CorpusError("vector entries must be numbers", line=lineno)
        if any(not math.isfinite(float(v)) for v in vector):
            raise CorpusError("vector entries must be finite", line=lineno)
        if dimension is None:
            dimension = len(vector)
        elif len(vector) != dimension:
            raise CorpusError(
                f"dimension mismatch: expected {dimension}, got {len(vector)}", line=lineno)
        if context_id in out:
            raise CorpusError(f"duplicate context_id {context_id!r}", line=lineno)
        out[context_id] = FeatureVector.from_dense(vector)
    return out
