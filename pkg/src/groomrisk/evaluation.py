"""Per-group, per-category error reports over scored predictions.

Records carry an actual risk score (r_groom) and a predicted one (r_pred).
Actuals are bucketed into hard Moderate/Significant/Severe categories by
defuzzification, then each (group, category) cell gets a count, an MSE,
and descriptive statistics of the predictions. The per-group overall MSE
is the pooled mean over all of the group's records, which equals the
count-weighted mean of its category MSEs.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotations import GROUPS
from .errors import ParameterError
from .fuzzy import CATEGORIES, FuzzyConfig, RiskCategory, classify

REPORT_FORMATS = ("table-text", "csv", "json")

_CATEGORY_LABELS = tuple(cat.label for cat in CATEGORIES)
_ROW_LABELS = _CATEGORY_LABELS + ("Overall",)


@dataclass(frozen=True)
class EvalRecord:
    """One evaluated context: actual score, predicted score, and the
    category of the actual (assigned by bucket(), None until then)."""

    context_id: str
    group: str
    r_groom: float
    r_pred: float
    category: RiskCategory | None = None

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ParameterError(f"unknown group {self.group!r}")
        for name in ("r_groom", "r_pred"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) \
                    or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class PredStats:
    """Descriptive statistics of r_pred within one bucket. Variance is the
    population variance; quantiles interpolate linearly between order
    statistics."""

    mean: float
    variance: float
    minimum: float
    p25: float
    median: float
    p75: float
    maximum: float

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "min": self.minimum,
            "p25": self.p25,
            "median": self.median,
            "p75": self.p75,
            "max": self.maximum,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PredStats":
        return cls(mean=data["mean"], variance=data["variance"],
                   minimum=data["min"], p25=data["p25"], median=data["median"],
                   p75=data["p75"], maximum=data["max"])


@dataclass(frozen=True)
class BucketStats:
    """Count, MSE, and prediction statistics for one cell. Empty cells keep
    mse and pred_stats as None (never 0, which would read as perfect)."""

    count: int
    mse: float | None
    pred_stats: PredStats | None = None

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mse": self.mse,
            "pred_stats": None if self.pred_stats is None else self.pred_stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "BucketStats":
        stats = data.get("pred_stats")
        return cls(count=data["count"], mse=data["mse"],
                   pred_stats=None if stats is None else PredStats.from_dict(stats))


@dataclass(frozen=True)
class GroupReport:
    group: str
    categories: dict[str, BucketStats]
    overall: BucketStats

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "categories": {label: b.to_dict() for label, b in self.categories.items()},
            "overall": self.overall.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GroupReport":
        return cls(group=data["group"],
                   categories={label: BucketStats.from_dict(b)
                               for label, b in data["categories"].items()},
                   overall=BucketStats.from_dict(data["overall"]))


@dataclass(frozen=True)
class EvalReport:
    fuzzy_config: dict
    train_config: dict | None
    records_sha256: str
    groups: dict[str, GroupReport]

    def to_dict(self) -> dict:
        return {
            "fuzzy_config": self.fuzzy_config,
            "train_config": self.train_config,
            "records_sha256": self.records_sha256,
            "groups": {name: g.to_dict() for name, g in self.groups.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "EvalReport":
        return cls(fuzzy_config=dict(data["fuzzy_config"]),
                   train_config=None if data["train_config"] is None
                   else dict(data["train_config"]),
                   records_sha256=data["records_sha256"],
                   groups={name: GroupReport.from_dict(g)
                           for name, g in data["groups"].items()})


def bucket(records: Iterable[EvalRecord], config: FuzzyConfig) -> list[EvalRecord]:
    """Assign each record the hard category of its actual score."""
    return [dataclasses.replace(r, category=classify(r.r_groom, config))
            for r in records]


def _require_bucketed(records: Sequence[EvalRecord]) -> None:
    for r in records:
        if r.category is None:
            raise ParameterError(
                f"record {r.context_id!r} has no category; run bucket() first")


def _pred_stats(preds: np.ndarray) -> PredStats:
    p25, median, p75 = np.quantile(preds, [0.25, 0.5, 0.75], method="linear")
    return PredStats(mean=float(preds.mean()),
                     variance=float(np.var(preds)),
                     minimum=float(preds.min()), p25=float(p25),
                     median=float(median), p75=float(p75),
                     maximum=float(preds.max()))


def per_category_mse(records: Sequence[EvalRecord]) -> dict[str, GroupReport]:
    """MSE per (group, category) cell plus the per-group pooled overall.

    Records must be bucketed. Every group appears in the result even with
    zero records; empty cells carry count 0 and MSE None.
    """
    _require_bucketed(records)
    ordered = sorted(records, key=lambda r: r.context_id)
    out: dict[str, GroupReport] = {}
    for group in GROUPS:
        cells: dict[str, BucketStats] = {}
        group_sq: list[float] = []
        for cat in CATEGORIES:
            sq = [(r.r_pred - r.r_groom) ** 2 for r in ordered
                  if r.group == group and r.category is cat]
            group_sq.extend(sq)
            cells[cat.label] = BucketStats(
                count=len(sq),
                mse=float(np.mean(sq)) if sq else None)
        overall = BucketStats(
            count=len(group_sq),
            mse=float(np.mean(group_sq)) if group_sq else None)
        out[group] = GroupReport(group=group, categories=cells, overall=overall)
    return out


def distribution_stats(records: Sequence[EvalRecord],
                       ) -> dict[str, dict[str, PredStats | None]]:
    """Descriptive statistics of r_pred per (group, category) cell."""
    _require_bucketed(records)
    ordered = sorted(records, key=lambda r: r.context_id)
    out: dict[str, dict[str, PredStats | None]] = {}
    for group in GROUPS:
        per_cat: dict[str, PredStats | None] = {}
        for cat in CATEGORIES:
            preds = np.array([r.r_pred for r in ordered
                              if r.group == group and r.category is cat])
            per_cat[cat.label] = _pred_stats(preds) if preds.size else None
        out[group] = per_cat
    return out


def records_sha256(records: Sequence[EvalRecord]) -> str:
    """Content hash of the record set, independent of input order."""
    rows = sorted((r.context_id, r.group, float(r.r_groom), float(r.r_pred))
                  for r in records)
    blob = json.dumps(rows, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def build_report(records: Iterable[EvalRecord], fuzzy_config: FuzzyConfig,
                 train_config_dict: dict | None = None) -> EvalReport:
    """Bucket records under the fuzzy config and assemble the full report.

    Records are sorted by context_id before reduction, so shuffled input
    produces an identical report.
    """
    assigned = sorted(bucket(records, fuzzy_config), key=lambda r: r.context_id)
    mse_part = per_category_mse(assigned)
    dist_part = distribution_stats(assigned)
    groups: dict[str, GroupReport] = {}
    for group in GROUPS:
        base = mse_part[group]
        cells = {label: dataclasses.replace(b, pred_stats=dist_part[group][label])
                 for label, b in base.categories.items()}
        groups[group] = GroupReport(group=group, categories=cells,
                                    overall=base.overall)
    return EvalReport(fuzzy_config=fuzzy_config.to_dict(),
                      train_config=train_config_dict,
                      records_sha256=records_sha256(assigned),
                      groups=groups)


def _cell_text(stats: BucketStats) -> str:
    if stats.count == 0:
        return "- (n=0)"
    return f"{stats.mse:.3f} (n={stats.count})"


def _footer_lines(report: EvalReport) -> list[str]:
    return [
        "# fuzzy_config: " + json.dumps(report.fuzzy_config, sort_keys=True),
        "# train_config: " + json.dumps(report.train_config, sort_keys=True),
        "# records_sha256: " + report.records_sha256,
    ]


def _emit_table_text(report: EvalReport) -> str:
    rows: list[list[str]] = [["Category", *GROUPS]]
    for label in _ROW_LABELS:
        cells = [label]
        for group in GROUPS:
            g = report.groups[group]
            stats = g.overall if label == "Overall" else g.categories[label]
            cells.append(_cell_text(stats))
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["MSE by group and risk category"]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    lines.extend(_footer_lines(report))
    return "\n".join(lines) + "\n"


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _emit_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    for line in _footer_lines(report):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["group", "category", "count", "mse", "pred_mean",
                     "pred_variance", "pred_min", "pred_p25", "pred_median",
                     "pred_p75", "pred_max"])
    for group in GROUPS:
        g = report.groups[group]
        for label in _ROW_LABELS:
            stats = g.overall if label == "Overall" else g.categories[label]
            row = [group, label, str(stats.count), _fmt(stats.mse)]
            ps = stats.pred_stats
            if ps is None:
                row.extend([""] * 7)
            else:
                row.extend(_fmt(v) for v in (ps.mean, ps.variance, ps.minimum,
                                             ps.p25, ps.median, ps.p75, ps.maximum))
            writer.writerow(row)
    return buf.getvalue()


def emit_report(report: EvalReport, format: str = "table-text") -> bytes:
    """Render a report to bytes; identical reports yield identical bytes."""
    if format == "table-text":
        return _emit_table_text(report).encode("utf-8")
    if format == "csv":
        return _emit_csv(report).encode("utf-8")
    if format == "json":
        return (json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
                ).encode("utf-8")
    raise ParameterError(
        f"unknown report format {format!r}; expected one of {REPORT_FORMATS}")
