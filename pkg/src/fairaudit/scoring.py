"""Bias Index, Fairness Score, tolerance bands and verdicts.

The Bias Index of a protected attribute is the root-mean-square deviation of
its metric values from their ideals. The Fairness Score is one minus the
root-mean-square of the Bias Indexes. The score is deliberately left
unclamped, so large Disparate Impact deviations can push it below zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigError
from .metrics import MetricValue

DEFAULT_BAND = 0.1
DEFAULT_BIAS_THRESHOLD = 0.1
DEFAULT_FAIRNESS_THRESHOLD = 0.9

# absorbs float noise such as 0.9 - 1.0 == -0.09999999999999998
_EPS = 1e-12


@dataclass(frozen=True)
class ToleranceBand:
    half_width: float = DEFAULT_BAND

    def __post_init__(self):
        if not self.half_width >= 0:
            raise ConfigError(f"tolerance half-width must be >= 0, got {self.half_width!r}")

    def bounds(self, ideal: float) -> tuple[float, float]:
        return ideal - self.half_width, ideal + self.half_width

    def contains(self, mv: MetricValue) -> bool:
        return abs(mv.deviation) <= self.half_width + _EPS


def bias_index(metrics: Sequence[MetricValue]) -> float:
    if not metrics:
        raise ConfigError("bias index needs at least one metric value")
    return math.sqrt(sum(mv.deviation**2 for mv in metrics) / len(metrics))


def fairness_score(bias_indexes: Sequence[float]) -> float:
    if not bias_indexes:
        raise ConfigError("fairness score needs at least one bias index")
    return 1.0 - math.sqrt(sum(bi * bi for bi in bias_indexes) / len(bias_indexes))


def fairness_score_from_metrics(metric_lists: Sequence[Sequence[MetricValue]]) -> float:
    """Fairness Score straight from the metric deviations, skipping the per-attribute step.

    Only equal to :func:`fairness_score` of the Bias Indexes when every
    attribute carries the same number of metrics.
    """
    if not metric_lists or any(not ms for ms in metric_lists):
        raise ConfigError("fairness score needs at least one nonempty metric list")
    total = sum(mv.deviation**2 for ms in metric_lists for mv in ms)
    cells = sum(len(ms) for ms in metric_lists)
    return 1.0 - math.sqrt(total / cells)


@dataclass(frozen=True)
class AttributeAudit:
    attribute: str
    metrics: tuple[MetricValue, ...]
    bias_index: float
    unbiased: bool
    # True when only post-training metrics were available
    reduced_basis: bool = False

    def metric(self, metric_id: str) -> MetricValue:
        for mv in self.metrics:
            if mv.metric_id == metric_id:
                return mv
        raise KeyError(metric_id)


def audit_attribute(
    attribute: str,
    metrics: Sequence[MetricValue],
    bias_threshold: float = DEFAULT_BIAS_THRESHOLD,
    reduced_basis: bool = False,
) -> AttributeAudit:
    bi = bias_index(metrics)
    return AttributeAudit(attribute, tuple(metrics), bi, bi <= bias_threshold + _EPS, reduced_basis)


@dataclass(frozen=True)
class FairnessScoreResult:
    fairness_score: float
    fair: bool
    attribute_audits: tuple[AttributeAudit, ...]


def score_audits(
    audits: Sequence[AttributeAudit], fairness_threshold: float = DEFAULT_FAIRNESS_THRESHOLD
) -> FairnessScoreResult:
    fs = fairness_score([a.bias_index for a in audits])
    return FairnessScoreResult(fs, fs >= fairness_threshold - _EPS, tuple(audits))


@dataclass(frozen=True)
class Verdict:
    band: ToleranceBand
    bias_threshold: float
    fairness_threshold: float
    metric_in_band: dict[str, dict[str, bool]]
    attribute_unbiased: dict[str, bool]
    fairness_score: float
    fair: bool
    out_of_band: list[tuple[str, str, float]] = field(default_factory=list)


def _check_threshold(name, value):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value!r}")


def verdict(
    result: FairnessScoreResult,
    band: ToleranceBand = ToleranceBand(),
    bias_threshold: float = DEFAULT_BIAS_THRESHOLD,
    fairness_threshold: float = DEFAULT_FAIRNESS_THRESHOLD,
) -> Verdict:
    _check_threshold("bias_threshold", bias_threshold)
    _check_threshold("fairness_threshold", fairness_threshold)
    in_band = {}
    unbiased = {}
    outside = []
    for audit in result.attribute_audits:
        flags = {mv.metric_id: band.contains(mv) for mv in audit.metrics}
        in_band[audit.attribute] = flags
        unbiased[audit.attribute] = audit.bias_index <= bias_threshold + _EPS
        outside += [(audit.attribute, mv.metric_id, mv.value) for mv in audit.metrics if not flags[mv.metric_id]]
    fs = result.fairness_score
    return Verdict(
        band=band,
        bias_threshold=bias_threshold,
        fairness_threshold=fairness_threshold,
        metric_in_band=in_band,
        attribute_unbiased=unbiased,
        fairness_score=fs,
        fair=fs >= fairness_threshold - _EPS,
        out_of_band=outside,
    )
