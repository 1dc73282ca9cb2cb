"""Run configuration: one JSON document covering every module's knobs.

The file holds optional top-level sections named after the domain configs::

    {
      "fuzzy":    {... FuzzyConfig fields ...},
      "train":    {... TrainConfig fields ...},
      "synth":    {... SynthConfig fields ...},
      "features": {"kind": "hash", "dimension": 262144, ...}
    }

Missing sections fall back to defaults; unknown keys are rejected rather
than ignored. Command-line flags override file values. When no path is
given, the GROOMRISK_CONFIG environment variable is consulted.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParameterError
from .features import FeatureSpec, HashFeatureSpec, feature_spec_from_dict
from .fuzzy import FuzzyConfig
from .regressor import TrainConfig
from .synthgen import SynthConfig

CONFIG_ENV_VAR = "GROOMRISK_CONFIG"

_SECTIONS = ("fuzzy", "train", "synth", "features")


@dataclass(frozen=True)
class RunConfig:
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    features: FeatureSpec = field(default_factory=HashFeatureSpec)

    def to_dict(self) -> dict:
        return {
            "fuzzy": self.fuzzy.to_dict(),
            "train": self.train.to_dict(),
            "synth": self.synth.to_dict(),
            "features": self.features.to_dict(),
        }


def run_config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ParameterError("config document must be a JSON object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ParameterError(
            f"unknown config sections: {sorted(unknown)}; expected {_SECTIONS}")
    fuzzy = FuzzyConfig.from_dict(data["fuzzy"]) if "fuzzy" in data else FuzzyConfig()
    train = TrainConfig.from_dict(data["train"]) if "train" in data else TrainConfig()
    synth = SynthConfig.from_dict(data["synth"]) if "synth" in data else SynthConfig()
    features = (feature_spec_from_dict(data["features"])
                if "features" in data else HashFeatureSpec())
    return RunConfig(fuzzy=fuzzy, train=train, synth=synth, features=features)


def load_run_config(path: str | Path | None = None) -> RunConfig:
    """Load the run config from ``path``, the GROOMRISK_CONFIG env var, or
    defaults, in that order of preference."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParameterError(f"cannot read config file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config file {path} is not valid JSON: {exc.msg}") from None
    return run_config_from_dict(data)
