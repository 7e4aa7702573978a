"""Group fairness metrics computed from :class:`GroupCounts`.

Sign conventions: SPD and AOD subtract the privileged group's rate from the
unprivileged group's; EOD and EMOD subtract the unprivileged group's rate
from the privileged group's. Hence AOD == -(EOD + EMOD) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, EmptyGroup, MetricUndefined, UndefinedRate, UndefinedRatio
from .protection import GroupCounts, GroupTally

SPD = "SPD"
DI = "DI"
EOD = "EOD"
EMOD = "EMOD"
AOD = "AOD"

PRE_TRAINING = "pre_training"
POST_TRAINING = "post_training"

PHASE_METRICS = {
    PRE_TRAINING: (SPD, DI),
    POST_TRAINING: (EOD, EMOD, AOD),
}
METRIC_IDS = PHASE_METRICS[PRE_TRAINING] + PHASE_METRICS[POST_TRAINING]
RATIO_METRICS = frozenset({DI})

METRIC_NAMES = {
    SPD: "Statistical Parity Difference",
    DI: "Disparate Impact",
    EOD: "Equal Opportunity Difference",
    EMOD: "Equal Mis-Opportunity Difference",
    AOD: "Average Odds Difference",
}


def ideal_value(metric_id: str) -> float:
    return 1.0 if metric_id in RATIO_METRICS else 0.0


@dataclass(frozen=True)
class MetricValue:
    metric_id: str
    value: float
    ideal: float = field(default=None)

    def __post_init__(self):
        if self.metric_id not in METRIC_IDS:
            raise ConfigError(f"unknown metric {self.metric_id!r}")
        if self.ideal is None:
            object.__setattr__(self, "ideal", ideal_value(self.metric_id))
        object.__setattr__(self, "value", float(self.value))

    @property
    def deviation(self) -> float:
        return self.value - self.ideal


@dataclass(frozen=True)
class MetricSet:
    attribute: str
    phase: str
    values: tuple[MetricValue, ...]

    def __getitem__(self, metric_id: str) -> MetricValue:
        for mv in self.values:
            if mv.metric_id == metric_id:
                return mv
        raise KeyError(metric_id)


def _both_nonempty(c: GroupCounts):
    if c.privileged.n <= 0:
        raise EmptyGroup("privileged")
    if c.unprivileged.n <= 0:
        raise EmptyGroup("unprivileged")


def _require_predictions(c: GroupCounts):
    if not c.has_predictions:
        raise ConfigError("post-training metrics need predictions in the group counts")


def _tpr(t: GroupTally, group: str, metric_id: str) -> float:
    if t.actual_positives == 0:
        raise UndefinedRate(group, "true positive rate", metric_id)
    return t.tp / t.actual_positives


def _fpr(t: GroupTally, group: str, metric_id: str) -> float:
    if t.actual_negatives == 0:
        raise UndefinedRate(group, "false positive rate", metric_id)
    return t.fp / t.actual_negatives


def statistical_parity_difference(c: GroupCounts) -> MetricValue:
    _both_nonempty(c)
    return MetricValue(SPD, c.unprivileged.fav_rate - c.privileged.fav_rate)


def disparate_impact(c: GroupCounts) -> MetricValue:
    """Unprivileged over privileged favorable rate; 1 when both rates are 0."""
    _both_nonempty(c)
    r_priv, r_unpriv = c.privileged.fav_rate, c.unprivileged.fav_rate
    if r_priv == 0:
        if r_unpriv == 0:
            return MetricValue(DI, 1.0)
        raise UndefinedRatio(r_unpriv, r_priv)
    return MetricValue(DI, r_unpriv / r_priv)


def equal_opportunity_difference(c: GroupCounts) -> MetricValue:
    _require_predictions(c)
    return MetricValue(
        EOD, _tpr(c.privileged, "privileged", EOD) - _tpr(c.unprivileged, "unprivileged", EOD)
    )


def equal_mis_opportunity_difference(c: GroupCounts) -> MetricValue:
    _require_predictions(c)
    return MetricValue(
        EMOD, _fpr(c.privileged, "privileged", EMOD) - _fpr(c.unprivileged, "unprivileged", EMOD)
    )


def average_odds_difference(c: GroupCounts) -> MetricValue:
    _require_predictions(c)
    tpr_gap = _tpr(c.unprivileged, "unprivileged", AOD) - _tpr(c.privileged, "privileged", AOD)
    fpr_gap = _fpr(c.unprivileged, "unprivileged", AOD) - _fpr(c.privileged, "privileged", AOD)
    return MetricValue(AOD, (tpr_gap + fpr_gap) / 2)


METRIC_FUNCTIONS = {
    SPD: statistical_parity_difference,
    DI: disparate_impact,
    EOD: equal_opportunity_difference,
    EMOD: equal_mis_opportunity_difference,
    AOD: average_odds_difference,
}


def compute_metric_set(c: GroupCounts, phase: str, attribute: str = "") -> MetricSet:
    """SPD and DI for ``pre_training``; EOD, EMOD and AOD for ``post_training``.

    A failing metric re-raises with its ``metric_id`` filled in.
    """
    try:
        ids = PHASE_METRICS[phase]
    except KeyError:
        raise ConfigError(f"unknown phase {phase!r}") from None
    values = []
    for metric_id in ids:
        try:
            values.append(METRIC_FUNCTIONS[metric_id](c))
        except MetricUndefined as exc:
            exc.metric_id = metric_id
            raise
        except EmptyGroup as exc:
            exc.metric_id = metric_id
            if attribute and exc.attribute is None:
                exc.attribute = attribute
            raise
    return MetricSet(attribute, phase, tuple(values))
