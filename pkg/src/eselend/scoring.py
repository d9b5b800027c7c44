"""Composite ESE scores from per-farmer metric records.

Pipeline: each metric's cohort values are normalized to [0, 1] with the
better direction mapped high, metrics are weighted (category weights follow
the metric count per pillar, split uniformly inside the pillar, which makes
every metric worth 1/total unless explicit overrides are given), and the
weighted sum is scaled to [0, 100]. The result feeds `success_probability`
directly.

Normalization statistics come from the scored cohort itself. A metric
definition may pin explicit (min, max) bounds instead, for scoring against
a reference population; pinned bounds apply to min-max normalization, and
values outside them clip to the ends of [0, 1]. The z-score variant always
uses cohort statistics.

File formats: metric records arrive as CSV with header
``farmer_id,metric_id,value``; the schema is CSV with header
``metric_id,pillar,direction,kind,weight,min,max`` (the last three columns
may be blank); scores leave as CSV with header ``farmer_id,score`` and four
decimal places. Malformed metric data raises DataError, malformed schema
raises ConfigError, both with file and line context.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

__all__ = [
    "PILLARS",
    "DIRECTIONS",
    "KINDS",
    "NORMALIZATIONS",
    "MetricDef",
    "MetricRecord",
    "ScoringScheme",
    "normalize",
    "category_weights",
    "composite_score",
    "read_metrics_csv",
    "read_schema_csv",
    "write_scores_csv",
]

PILLARS = ("ENVIRONMENTAL", "SOCIAL", "ECONOMIC")
DIRECTIONS = ("HIGHER_BETTER", "LOWER_BETTER")
KINDS = ("CONTINUOUS", "BINARY")
NORMALIZATIONS = ("MIN_MAX", "Z_SCORE_CLIPPED")

_WEIGHT_SUM_TOL = 1e-12
_Z_CLIP = 3.0


@dataclass(frozen=True)
class MetricDef:
    """One metric in a scoring schema.

    weight: optional explicit weight override; overrides are all-or-nothing
    across a schema and must sum to 1.
    bounds: optional (min, max) reference range for min-max normalization.
    """

    id: str
    pillar: str
    direction: str
    kind: str
    weight: float | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id.strip():
            raise ConfigError("metric id must be a non-empty string")
        if self.pillar not in PILLARS:
            raise ConfigError(f"unknown pillar {self.pillar!r} for metric {self.id!r}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"unknown direction {self.direction!r} for metric {self.id!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r} for metric {self.id!r}")
        if self.weight is not None:
            if not (isinstance(self.weight, (int, float)) and math.isfinite(self.weight)):
                raise ConfigError(f"weight for metric {self.id!r} must be finite")
            if self.weight < 0:
                raise ConfigError(f"weight for metric {self.id!r} must be >= 0")
        if self.bounds is not None:
            lo, hi = self.bounds
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigError(
                    f"bounds for metric {self.id!r} must be finite with min < max"
                )


@dataclass(frozen=True)
class MetricRecord:
    """One observed value of one metric for one farmer."""

    farmer_id: str
    metric_id: str
    value: float

    def __post_init__(self):
        if not isinstance(self.farmer_id, str) or not self.farmer_id.strip():
            raise DataError("farmer_id must be a non-empty string")
        if not isinstance(self.metric_id, str) or not self.metric_id.strip():
            raise DataError("metric_id must be a non-empty string")
        if not (isinstance(self.value, (int, float)) and math.isfinite(self.value)):
            raise DataError(
                f"non-finite value {self.value!r} for farmer {self.farmer_id!r}, "
                f"metric {self.metric_id!r}"
            )


@dataclass(frozen=True)
class ScoringScheme:
    """Schema plus normalization choice.

    category_weighting only supports COUNT_BASED: each pillar's weight is
    its share of the metric count.
    """

    schema: tuple[MetricDef, ...]
    normalization: str = "MIN_MAX"
    category_weighting: str = "COUNT_BASED"

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        if not self.schema:
            raise ConfigError("schema must contain at least one metric")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if self.category_weighting != "COUNT_BASED":
            raise ConfigError(
                f"unknown category weighting {self.category_weighting!r}"
            )
        seen: set[str] = set()
        for metric in self.schema:
            if metric.id in seen:
                raise ConfigError(f"duplicate metric id {metric.id!r} in schema")
            seen.add(metric.id)
        overridden = [m for m in self.schema if m.weight is not None]
        if overridden and len(overridden) != len(self.schema):
            missing = sorted(m.id for m in self.schema if m.weight is None)
            raise ConfigError(
                "weight overrides are all-or-nothing; missing weights for: "
                + ", ".join(missing)
            )
        if overridden:
            total = math.fsum(m.weight for m in self.schema)
            if abs(total - 1.0) > _WEIGHT_SUM_TOL:
                raise ConfigError(f"explicit weights sum to {total!r}, expected 1")

    @property
    def has_weight_overrides(self) -> bool:
        return self.schema[0].weight is not None

    def metric_weights(self) -> dict[str, float]:
        """Effective per-metric weights (they always sum to 1)."""
        if self.has_weight_overrides:
            return {m.id: float(m.weight) for m in self.schema}
        share = 1.0 / len(self.schema)
        return {m.id: share for m in self.schema}


def _validate_binary(metric: MetricDef, values: np.ndarray) -> None:
    bad = values[(values != 0.0) & (values != 1.0)]
    if bad.size:
        raise DataError(
            f"binary metric {metric.id!r} has non-binary value {float(bad[0])!r}"
        )


def normalize(values: Sequence[float], metric: MetricDef,
              normalization: str = "MIN_MAX") -> np.ndarray:
    """Normalize one metric's cohort values to [0, 1], better mapped high.

    MIN_MAX rescales by the cohort range (or the metric's pinned bounds,
    clipping outside values); Z_SCORE_CLIPPED standardizes, clips to three
    standard deviations, and maps [-3, 3] onto [0, 1]. A cohort with no
    variation normalizes to 0.5 throughout: a metric that cannot rank
    anybody should not move anybody's score. LOWER_BETTER metrics are
    flipped after scaling.
    """
    if normalization not in NORMALIZATIONS:
        raise ConfigError(f"unknown normalization {normalization!r}")
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise DataError(f"cohort for metric {metric.id!r} must be non-empty")
    if not np.all(np.isfinite(vals)):
        bad = vals[~np.isfinite(vals)][0]
        raise DataError(f"non-finite value {bad!r} for metric {metric.id!r}")
    if metric.kind == "BINARY":
        _validate_binary(metric, vals)

    if normalization == "MIN_MAX":
        if metric.bounds is not None:
            lo, hi = metric.bounds
            scaled = np.clip((vals - lo) / (hi - lo), 0.0, 1.0)
        else:
            lo, hi = float(vals.min()), float(vals.max())
            if lo == hi:
                scaled = np.full_like(vals, 0.5)
            else:
                scaled = (vals - lo) / (hi - lo)
    else:
        mu = float(vals.mean())
        sd = float(vals.std())
        if sd == 0.0:
            scaled = np.full_like(vals, 0.5)
        else:
            z = np.clip((vals - mu) / sd, -_Z_CLIP, _Z_CLIP)
            scaled = (z + _Z_CLIP) / (2.0 * _Z_CLIP)

    if metric.direction == "LOWER_BETTER":
        scaled = 1.0 - scaled
    return np.clip(scaled, 0.0, 1.0)


def category_weights(scheme: ScoringScheme) -> dict[str, float]:
    """Count-based pillar weights: count(pillar) / total, zero if absent."""
    total = len(scheme.schema)
    counts = {pillar: 0 for pillar in PILLARS}
    for metric in scheme.schema:
        counts[metric.pillar] += 1
    return {pillar: counts[pillar] / total for pillar in PILLARS}


def composite_score(records: Iterable[MetricRecord],
                    scheme: ScoringScheme) -> dict[str, float]:
    """Composite score in [0, 100] per farmer, keyed and ordered by id.

    Every farmer must have exactly one value for every schema metric; the
    error for missing pairs lists all gaps, and duplicated or unknown
    metric ids are rejected the same way. No imputation happens here: a
    fabricated value would silently change a credit decision.
    """
    records = list(records)
    by_id = {m.id: m for m in scheme.schema}
    values: dict[tuple[str, str], float] = {}
    problems: list[str] = []
    for rec in records:
        if rec.metric_id not in by_id:
            problems.append(f"unknown metric {rec.metric_id!r} for farmer {rec.farmer_id!r}")
            continue
        key = (rec.farmer_id, rec.metric_id)
        if key in values:
            problems.append(f"duplicate value for farmer {rec.farmer_id!r}, "
                            f"metric {rec.metric_id!r}")
            continue
        values[key] = float(rec.value)
    if problems:
        raise DataError("invalid metric records", details=sorted(problems))

    farmers = sorted({farmer for farmer, _ in values})
    if not farmers:
        return {}
    gaps = [f"farmer {farmer!r} missing metric {metric.id!r}"
            for farmer in farmers for metric in scheme.schema
            if (farmer, metric.id) not in values]
    if gaps:
        raise DataError(f"{len(gaps)} missing (farmer, metric) pairs",
                        details=gaps)

    weights = scheme.metric_weights()
    totals = np.zeros(len(farmers))
    for metric in scheme.schema:
        cohort = np.array([values[(farmer, metric.id)] for farmer in farmers])
        totals += weights[metric.id] * normalize(cohort, metric, scheme.normalization)
    scores = np.clip(totals * 100.0, 0.0, 100.0)
    return {farmer: float(score) for farmer, score in zip(farmers, scores)}


# ----------------------------------------------------------------------
# file interfaces
# ----------------------------------------------------------------------

_METRICS_HEADER = ["farmer_id", "metric_id", "value"]
_SCHEMA_HEADER = ["metric_id", "pillar", "direction", "kind", "weight", "min", "max"]


def read_metrics_csv(path) -> list[MetricRecord]:
    """Load metric records, reporting problems with file and line context."""
    path = Path(path)
    rows: list[MetricRecord] = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"{path}: empty metrics file")
        if [h.strip() for h in header] != _METRICS_HEADER:
            raise DataError(
                f"{path}:1: expected header {','.join(_METRICS_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            farmer_id, metric_id, raw = (cell.strip() for cell in row)
            try:
                value = float(raw)
            except ValueError:
                raise DataError(f"{path}:{lineno}: value {raw!r} is not a number") from None
            try:
                rows.append(MetricRecord(farmer_id, metric_id, value))
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ConfigError(f"{path}: metrics file contains no records")
    return rows


def _parse_optional_float(raw: str, path: Path, lineno: int, column: str) -> float | None:
    raw = raw.strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: {column} {raw!r} is not a number") from None


def read_schema_csv(path, normalization: str = "MIN_MAX") -> ScoringScheme:
    """Load a scoring schema; see the module docstring for the format."""
    path = Path(path)
    metrics: list[MetricDef] = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"{path}: empty schema file")
        names = [h.strip() for h in header]
        if names != _SCHEMA_HEADER and names != _SCHEMA_HEADER[:4]:
            raise ConfigError(
                f"{path}:1: expected header {','.join(_SCHEMA_HEADER)} "
                "(weight, min, and max may be omitted)"
            )
        width = len(names)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != width:
                raise ConfigError(
                    f"{path}:{lineno}: expected {width} fields, got {len(row)}"
                )
            metric_id, pillar, direction, kind = (cell.strip() for cell in row[:4])
            weight = bound_lo = bound_hi = None
            if width == 7:
                weight = _parse_optional_float(row[4], path, lineno, "weight")
                bound_lo = _parse_optional_float(row[5], path, lineno, "min")
                bound_hi = _parse_optional_float(row[6], path, lineno, "max")
            if (bound_lo is None) != (bound_hi is None):
                raise ConfigError(f"{path}:{lineno}: min and max must be given together")
            bounds = None if bound_lo is None else (bound_lo, bound_hi)
            try:
                metrics.append(MetricDef(metric_id, pillar, direction, kind,
                                         weight=weight, bounds=bounds))
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    if not metrics:
        raise ConfigError(f"{path}: schema file contains no metrics")
    return ScoringScheme(schema=tuple(metrics), normalization=normalization)


def write_scores_csv(path, scores: Mapping[str, float],
                     header_comment: str | None = None) -> None:
    """Write ``farmer_id,score`` rows, scores at four decimal places.

    header_comment, when given, is emitted verbatim as the first line
    (callers use it for a ``#`` provenance comment).
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment is not None:
            fh.write(header_comment + "\n")
        writer = csv.writer(fh)
        writer.writerow(["farmer_id", "score"])
        for farmer in sorted(scores):
            writer.writerow([farmer, f"{scores[farmer]:.4f}"])
