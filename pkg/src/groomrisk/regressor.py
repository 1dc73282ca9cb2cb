"""Linear risk regressor trained with Adam on a mean-squared-error objective.

The model is a single linear layer: r_pred = w . x + b over either hashed
n-gram features or externally supplied embeddings. Training is plain
mini-batch Adam with bias correction, zero initialization, a seeded
per-epoch shuffle, and the last short batch kept, so a run is fully
deterministic given its seed.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .annotations import ChatContext, N_STRATEGIES
from .errors import ModelFormatError, ParameterError, TrainingDivergedError
from .features import (
    EmbeddingFeatureSpec,
    FeatureSpec,
    FeatureVector,
    HashFeatureSpec,
    extract_features,
    feature_spec_from_dict,
)

MODEL_FORMAT = "groomrisk-linear-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer hyperparameters. Defaults mirror the shipped fine-tuning recipe
    (Adam, learning rate 2e-5, 5 epochs, batch size 4); beta/epsilon are the
    optimizer's customary defaults."""

    optimizer: str = "adam"
    learning_rate: float = 2e-5
    epochs: int = 5
    batch_size: int = 4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    shuffle_seed: int = 0
    fit_bias: bool = True

    def __post_init__(self):
        if self.optimizer != "adam":
            raise ParameterError(f"unsupported optimizer {self.optimizer!r}")
        if not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ParameterError("adam betas must be in [0, 1)")
        if not self.adam_epsilon > 0:
            raise ParameterError("adam_epsilon must be > 0")

    def to_dict(self) -> dict:
        return {
            "optimizer": self.optimizer,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "adam_beta1": self.adam_beta1,
            "adam_beta2": self.adam_beta2,
            "adam_epsilon": self.adam_epsilon,
            "shuffle_seed": self.shuffle_seed,
            "fit_bias": self.fit_bias,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    feature_spec: FeatureSpec
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 1 or self.weights.size != self.feature_spec.dimension:
            raise ParameterError(
                f"weights length {self.weights.size} does not match feature "
                f"dimension {self.feature_spec.dimension}")
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ParameterError("model parameters must be finite")


def predict(model: LinearModel, fv: FeatureVector, clamp: bool = False) -> float:
    """r_pred = w . x + b; optionally clamped to the attainable score range."""
    if fv.dimension != model.feature_spec.dimension:
        raise ParameterError(
            f"feature dimension {fv.dimension} does not match model "
            f"dimension {model.feature_spec.dimension}")
    value = fv.dot(model.weights) + model.bias
    if clamp:
        value = min(max(value, 0.0), float(N_STRATEGIES))
    return value


def mse_and_gradient(model: LinearModel,
                     batch: Sequence[tuple[FeatureVector, float]],
                     ) -> tuple[float, np.ndarray, float]:
    """Mean squared error over a batch and its exact analytic gradients.

    loss = mean_i (r_pred_i - r_groom_i)^2
    grad_w = (2/B) sum_i (r_pred_i - r_groom_i) x_i, grad_b likewise.
    """
    if not batch:
        raise ParameterError("batch must be non-empty")
    grad_w = np.zeros(model.feature_spec.dimension, dtype=np.float64)
    grad_b = 0.0
    loss = 0.0
    scale = 2.0 / len(batch)
    for fv, target in batch:
        residual = predict(model, fv) - float(target)
        loss += residual * residual
        np.add.at(grad_w, fv.indices, scale * residual * fv.values)
        grad_b += scale * residual
    return loss / len(batch), grad_w, grad_b


def fit(pairs: Sequence[tuple[FeatureVector, float]], spec: FeatureSpec,
        cfg: TrainConfig, trained_on: str = "pooled") -> LinearModel:
    """Adam-fit a linear model on (feature vector, risk score) pairs.

    Weights and bias start at zero; each epoch reshuffles with the seeded
    generator and walks mini-batches in shuffled order, keeping the last
    short batch. Bit-deterministic for a fixed (pairs, spec, cfg).
    """
    if not pairs:
        raise ParameterError("training set must be non-empty")
    dim = spec.dimension
    for fv, _ in pairs:
        if fv.dimension != dim:
            raise ParameterError(
                f"feature dimension {fv.dimension} does not match spec dimension {dim}")
    targets = np.array([float(y) for _, y in pairs])

    w = np.zeros(dim)
    b = 0.0
    m_w = np.zeros(dim)
    v_w = np.zeros(dim)
    m_b = v_b = 0.0
    scratch = np.empty(dim)
    beta1, beta2 = cfg.adam_beta1, cfg.adam_beta2
    eps, lr = cfg.adam_epsilon, cfg.learning_rate
    rng = np.random.default_rng(cfg.shuffle_seed)
    step = 0
    epoch_losses: list[float] = []

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(pairs))
        sq_error_sum = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch_idx = order[start:start + cfg.batch_size]
            batch_scale = 2.0 / len(batch_idx)
            # Batch loss and sparse gradient, reduced in shuffled order.
            grad_parts_i = []
            grad_parts_v = []
            grad_b = 0.0
            batch_sq = 0.0
            with np.errstate(over="ignore", invalid="ignore"):
                for i in batch_idx:
                    fv = pairs[i][0]
                    residual = fv.dot(w) + b - targets[i]
                    batch_sq += residual * residual
                    grad_parts_i.append(fv.indices)
                    grad_parts_v.append(batch_scale * residual * fv.values)
                    grad_b += batch_scale * residual
            if not np.isfinite(batch_sq):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch + 1}; "
                    "try a smaller learning rate")
            sq_error_sum += batch_sq
            # Collapse duplicate indices so v accumulates the squared sum,
            # exactly as a dense gradient would.
            idx = np.concatenate(grad_parts_i) if grad_parts_i else np.empty(0, np.int64)
            val = np.concatenate(grad_parts_v) if grad_parts_v else np.empty(0)
            uniq, inverse = np.unique(idx, return_inverse=True)
            grad = np.zeros(uniq.size)
            np.add.at(grad, inverse, val)

            step += 1
            m_w *= beta1
            m_w[uniq] += (1.0 - beta1) * grad
            v_w *= beta2
            v_w[uniq] += (1.0 - beta2) * grad * grad
            c1 = 1.0 - beta1 ** step
            c2 = 1.0 - beta2 ** step
            np.divide(v_w, c2, out=scratch)
            np.sqrt(scratch, out=scratch)
            scratch += eps
            np.divide(m_w, scratch, out=scratch)
            scratch *= lr / c1
            w -= scratch
            if cfg.fit_bias:
                m_b = beta1 * m_b + (1.0 - beta1) * grad_b
                v_b = beta2 * v_b + (1.0 - beta2) * grad_b * grad_b
                b -= lr * (m_b / c1) / (np.sqrt(v_b / c2) + eps)
        epoch_losses.append(sq_error_sum / len(pairs))

    meta = {
        "config": cfg.to_dict(),
        "trained_on": trained_on,
        "n_examples": len(pairs),
        "epoch_losses": epoch_losses,
        "final_loss": epoch_losses[-1],
    }
    return LinearModel(weights=w, bias=b, feature_spec=spec, train_meta=meta)


def train(dataset: Sequence[tuple[ChatContext, float]], spec: FeatureSpec,
          cfg: TrainConfig, embeddings: dict[str, FeatureVector] | None = None,
          trained_on: str = "pooled") -> LinearModel:
    """Train on (context, risk score) pairs under the given feature spec.

    Hash specs extract features from the contexts; embedding specs look
    vectors up by context_id and fail listing every missing id.
    """
    if not dataset:
        raise ParameterError("training set must be non-empty")
    pairs = list(zip(featurize([ctx for ctx, _ in dataset], spec, embeddings),
                     [y for _, y in dataset]))
    return fit(pairs, spec, cfg, trained_on=trained_on)


def featurize(contexts: Iterable[ChatContext], spec: FeatureSpec,
              embeddings: dict[str, FeatureVector] | None = None) -> list[FeatureVector]:
    """Feature vectors for contexts under a hash or embeddings spec."""
    contexts = list(contexts)
    if isinstance(spec, HashFeatureSpec):
        return [extract_features(ctx, spec) for ctx in contexts]
    if isinstance(spec, EmbeddingFeatureSpec):
        if embeddings is None:
            raise ParameterError("embeddings feature spec needs an embeddings map")
        missing = [ctx.context_id for ctx in contexts if ctx.context_id not in embeddings]
        if missing:
            raise ParameterError(
                "missing embeddings for context_ids: " + ", ".join(missing))
        vectors = [embeddings[ctx.context_id] for ctx in contexts]
        for fv in vectors:
            if fv.dimension != spec.dimension:
                raise ParameterError(
                    f"embedding dimension {fv.dimension} does not match "
                    f"spec dimension {spec.dimension}")
        return vectors
    raise ParameterError(f"unknown feature spec {spec!r}")


def save_model(model: LinearModel, target: IO[bytes] | str | Path | None = None) -> bytes:
    """Serialize a model; the weights round-trip bit-exactly via base64."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "feature_spec": model.feature_spec.to_dict(),
        "bias": model.bias,
        "weights_b64": base64.b64encode(
            model.weights.astype("<f8").tobytes()).decode("ascii"),
        "train_meta": model.train_meta,
    }
    data = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    if isinstance(target, (str, Path)):
        Path(target).write_bytes(data)
    elif target is not None:
        target.write(data)
    return data


def load_model(source: bytes | IO[bytes] | str | Path) -> LinearModel:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    try:
        payload = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"not a model file: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a model file")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {payload.get('version')!r}")
    try:
        spec = feature_spec_from_dict(payload["feature_spec"])
        weights = np.frombuffer(
            base64.b64decode(payload["weights_b64"]), dtype="<f8").copy()
        bias = float(payload["bias"])
        meta = payload.get("train_meta", {})
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from None
    if weights.size != spec.dimension:
        raise ModelFormatError(
            f"weights length {weights.size} does not match feature "
            f"dimension {spec.dimension}")
    return LinearModel(weights=weights, bias=bias, feature_spec=spec, train_meta=meta)
