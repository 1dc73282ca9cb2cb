"""Fuzzy grooming-risk scoring and evaluation toolkit.

Aggregates fuzzy strategy annotations into per-context risk scores, maps
scores to Moderate/Significant/Severe categories through hedged Gaussian
memberships, trains a linear regressor to predict the score from chat
text, and reports per-group, per-category error tables.
"""

from .annotations import (
    DEFAULT_WINDOW,
    GROUPS,
    N_STRATEGIES,
    SPEAKERS,
    STRATEGY_SLUGS,
    ChatContext,
    ChatMessage,
    StrategyVector,
    aggregate,
    build_contexts,
    combine_strategies,
    contexts_from_messages,
    parse_corpus,
    serialize_corpus,
    window_text,
)
from .config import RunConfig, load_run_config
from .errors import (
    CorpusError,
    ModelFormatError,
    ParameterError,
    TrainingDivergedError,
)
from .evaluation import (
    EvalRecord,
    EvalReport,
    bucket,
    build_report,
    distribution_stats,
    emit_report,
    per_category_mse,
)
from .features import (
    EmbeddingFeatureSpec,
    FeatureVector,
    HashFeatureSpec,
    extract_features,
    fnv1a64,
    load_embeddings,
)
from .fuzzy import (
    CATEGORIES,
    FuzzyConfig,
    MembershipVector,
    RiskCategory,
    category_boundaries,
    classify,
    defuzzify,
    gaussian_membership,
    membership_vector,
)
from .regressor import (
    LinearModel,
    TrainConfig,
    fit,
    load_model,
    mse_and_gradient,
    predict,
    save_model,
    train,
)
from .synthgen import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_WINDOW", "GROUPS", "N_STRATEGIES", "SPEAKERS", "STRATEGY_SLUGS",
    "ChatContext", "ChatMessage", "StrategyVector", "aggregate",
    "build_contexts", "combine_strategies", "contexts_from_messages",
    "parse_corpus", "serialize_corpus", "window_text",
    "RunConfig", "load_run_config",
    "CorpusError", "ModelFormatError", "ParameterError", "TrainingDivergedError",
    "EvalRecord", "EvalReport", "bucket", "build_report",
    "distribution_stats", "emit_report", "per_category_mse",
    "EmbeddingFeatureSpec", "FeatureVector", "HashFeatureSpec",
    "extract_features", "fnv1a64", "load_embeddings",
    "CATEGORIES", "FuzzyConfig", "MembershipVector", "RiskCategory",
    "category_boundaries", "classify", "defuzzify", "gaussian_membership",
    "membership_vector",
    "LinearModel", "TrainConfig", "fit", "load_model", "mse_and_gradient",
    "predict", "save_model", "train",
    "SynthConfig", "generate",
    "__version__",
]
