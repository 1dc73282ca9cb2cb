"""Gaussian risk-category memberships, hedges, and defuzzification.

A continuous risk score is mapped into three fuzzy categories (moderate,
significant, severe) by Gaussian membership functions centred at per-category
means and sharpened/broadened by hedge exponents. A defuzzification rule then
collapses the membership vector to a single crisp category.

Three membership modes are supported:

* ``literal-pdf``     - the standard-normal density, peak 1/sqrt(2*pi) ~ 0.399.
  Retained for fidelity experiments; note that no category can reach an
  alpha cut of 0.5 in this mode.
* ``normalized``      - the density without its normalising constant, peak 1.
* ``normalized-shoulder`` (default) - as ``normalized``, but the lowest
  category is flat at 1 left of its mean and the highest flat at 1 right of
  its mean, so "higher score, higher risk" holds over the whole score range.

All functions here are pure and operate in 64-bit floating point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)

MEMBERSHIP_MODES = ("literal-pdf", "normalized", "normalized-shoulder")
DEFUZZ_MODES = ("argmax", "alpha-highest")


class RiskCategory(enum.IntEnum):
    """Crisp risk categories, totally ordered from lowest to highest risk."""

    MODERATE = 0
    SIGNIFICANT = 1
    SEVERE = 2

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_label(cls, label: str) -> "RiskCategory":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ParameterError(f"unknown risk category {label!r}") from None


CATEGORIES = tuple(RiskCategory)
CATEGORY_LABELS = tuple(c.label for c in RiskCategory)


@dataclass(frozen=True)
class MembershipVector:
    """Degrees of membership of one risk score in the three categories.

    Components are each in [0, 1] but need not sum to 1.
    """

    mu_moderate: float
    mu_significant: float
    mu_severe: float

    def __post_init__(self):
        for name in ("mu_moderate", "mu_significant", "mu_severe"):
            mu = getattr(self, name)
            if isinstance(mu, bool) or not isinstance(mu, (int, float)) \
                    or not math.isfinite(mu):
                raise ParameterError(f"{name} must be a finite number, got {mu!r}")
            if not 0.0 <= mu <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1], got {mu}")
            object.__setattr__(self, name, float(mu))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mu_moderate, self.mu_significant, self.mu_severe)


@dataclass(frozen=True)
class FuzzyConfig:
    """Category means, hedge exponents, and the defuzzification rule.

    The defaults put the category means at (0.2, 1.0, 2.0) with hedge
    exponents (0.2, 1.0, 2.0) and sigma 1. ``defuzz_mode="alpha-highest"``
    picks the highest category whose membership reaches ``alpha`` (falling
    back to argmax when none does); the default ``"argmax"`` picks the
    category with maximal membership, ties broken toward higher risk.
    """

    means: tuple[float, float, float] = (0.2, 1.0, 2.0)
    sigma: float = 1.0
    hedge_exponents: tuple[float, float, float] = (0.2, 1.0, 2.0)
    alpha: float = 0.5
    membership_mode: str = "normalized-shoulder"
    defuzz_mode: str = "argmax"

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        hedges = tuple(float(h) for h in self.hedge_exponents)
        if len(means) != 3 or len(hedges) != 3:
            raise ParameterError("means and hedge_exponents must each have 3 entries")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "hedge_exponents", hedges)
        if not (means[0] < means[1] < means[2]):
            raise ParameterError(f"means must be strictly increasing, got {means}")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if not all(h > 0 for h in hedges):
            raise ParameterError(f"hedge exponents must be > 0, got {hedges}")
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must be in (0,1], got {self.alpha}")
        if self.membership_mode not in MEMBERSHIP_MODES:
            raise ParameterError(
                f"membership_mode must be one of {MEMBERSHIP_MODES}, got {self.membership_mode!r}"
            )
        if self.defuzz_mode not in DEFUZZ_MODES:
            raise ParameterError(
                f"defuzz_mode must be one of {DEFUZZ_MODES}, got {self.defuzz_mode!r}"
            )

    def to_dict(self) -> dict:
        return {
            "means": list(self.means),
            "sigma": self.sigma,
            "hedge_exponents": list(self.hedge_exponents),
            "alpha": self.alpha,
            "membership_mode": self.membership_mode,
            "defuzz_mode": self.defuzz_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FuzzyConfig":
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ParameterError(f"unknown fuzzy config keys: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("means", "hedge_exponents"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def gaussian_membership(score, mean: float, sigma: float, hedge: float,
                        mode: str = "normalized"):
    """Hedged Gaussian membership of ``score`` in a category centred at ``mean``.

    ``literal-pdf`` evaluates the standard-normal density of
    (score - mean) / sigma; the other modes drop the 1/sqrt(2*pi) factor so
    the peak value is 1. The hedge exponent is applied to the result.
    Standalone calls in ``normalized-shoulder`` mode behave as ``normalized``;
    shoulder flats are applied by :func:`membership_vector`, which knows the
    category position.

    Accepts a float or a numpy array of scores.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if not hedge > 0:
        raise ParameterError(f"hedge must be > 0, got {hedge}")
    if mode not in MEMBERSHIP_MODES:
        raise ParameterError(f"unknown membership mode {mode!r}")
    z = (np.asarray(score, dtype=np.float64) - mean) / sigma
    mu = np.exp(-0.5 * z * z)
    if mode == "literal-pdf":
        mu = mu / SQRT_TWO_PI
    mu = mu ** hedge
    if np.ndim(score) == 0:
        return float(mu)
    return mu


def _membership_grid(scores: np.ndarray, config: FuzzyConfig) -> np.ndarray:
    """Memberships for an array of scores; shape (3, len(scores))."""
    mus = np.stack([
        np.asarray(gaussian_membership(scores, config.means[i], config.sigma,
                                       config.hedge_exponents[i],
                                       config.membership_mode))
        for i in range(3)
    ])
    if config.membership_mode == "normalized-shoulder":
        mus[0] = np.where(scores <= config.means[0], 1.0, mus[0])
        mus[2] = np.where(scores >= config.means[2], 1.0, mus[2])
    return mus


def membership_vector(score: float, config: FuzzyConfig) -> MembershipVector:
    """Memberships of one risk score in the three categories under ``config``."""
    score = float(score)
    if not math.isfinite(score):
        raise ParameterError(f"score must be finite, got {score}")
    mus = _membership_grid(np.array([score], dtype=np.float64), config)
    return MembershipVector(float(mus[0, 0]), float(mus[1, 0]), float(mus[2, 0]))


def defuzzify(mv: MembershipVector, config: FuzzyConfig) -> RiskCategory:
    """Collapse a membership vector to a crisp category.

    ``alpha-highest`` returns the highest-ordered category whose membership
    reaches ``config.alpha``; when none qualifies it falls back to argmax.
    ``argmax`` returns the category with maximal membership. Ties always
    break toward higher risk.
    """
    mus = mv.as_tuple()
    if config.defuzz_mode == "alpha-highest":
        for cat in (RiskCategory.SEVERE, RiskCategory.SIGNIFICANT, RiskCategory.MODERATE):
            if mus[cat] >= config.alpha:
                return cat
    best = RiskCategory.MODERATE
    for cat in (RiskCategory.SIGNIFICANT, RiskCategory.SEVERE):
        if mus[cat] >= mus[best]:
            best = cat
    return best


def classify(score: float, config: FuzzyConfig) -> RiskCategory:
    """Shorthand for ``defuzzify(membership_vector(score, config), config)``."""
    return defuzzify(membership_vector(score, config), config)


def _classify_grid(scores: np.ndarray, config: FuzzyConfig) -> np.ndarray:
    """Vectorised ``classify`` over an array of scores; same formulas."""
    mus = _membership_grid(scores, config)
    # argmax with ties toward higher risk: scan rows severe-first.
    argmax = 2 - np.argmax(mus[::-1], axis=0)
    if config.defuzz_mode == "alpha-highest":
        qualifies = mus >= config.alpha
        highest = 2 - np.argmax(qualifies[::-1], axis=0)
        return np.where(qualifies.any(axis=0), highest, argmax)
    return argmax


def category_boundaries(config: FuzzyConfig, lo: float = 0.0, hi: float = 12.0,
                        step: float = 1e-4, refine: float = 1e-6,
                        ) -> list[tuple[float, RiskCategory, RiskCategory]]:
    """Score thresholds where the defuzzified category changes on [lo, hi].

    Scans a dense grid at ``step`` and sharpens each detected change by
    bisection until the bracket is narrower than ``refine``. Returns a list
    of (boundary score, category below, category above). Diagnostic utility
    for reports and tests.
    """
    n = int(round((hi - lo) / step)) + 1
    grid = lo + step * np.arange(n)
    cats = _classify_grid(grid, config)
    changes = np.nonzero(cats[1:] != cats[:-1])[0]
    out = []
    for i in changes:
        a, b = float(grid[i]), float(grid[i + 1])
        below = RiskCategory(int(cats[i]))
        above = RiskCategory(int(cats[i + 1]))
        while b - a > refine:
            mid = 0.5 * (a + b)
            if classify(mid, config) == below:
                a = mid
            else:
                b = mid
        out.append((0.5 * (a + b), below, above))
    return out
