"""Protected-attribute specs, group indicators and per-group outcome tallies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ColumnTypeError, ConfigError, EmptyGroup, LabelValueError, SchemaError, ShapeError
from .tabular import CATEGORICAL, Table

COMPLEMENT = "complement"

PRIVILEGED = 1
UNPRIVILEGED = 0
EXCLUDED = -1


@dataclass(frozen=True)
class ProtectedAttributeSpec:
    """Which values of ``attribute`` form the privileged and unprivileged groups.

    ``unprivileged_values`` is either an explicit set or ``"complement"``
    (every value that is not privileged).
    """

    attribute: str
    privileged_values: frozenset
    unprivileged_values: frozenset | str = COMPLEMENT
    display_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "privileged_values", frozenset(self.privileged_values))
        if not self.privileged_values:
            raise ConfigError(f"attribute {self.attribute!r}: privileged_values must be nonempty")
        if isinstance(self.unprivileged_values, str):
            if self.unprivileged_values != COMPLEMENT:
                raise ConfigError(
                    f"attribute {self.attribute!r}: unprivileged_values must be a value set or {COMPLEMENT!r}"
                )
        else:
            unpriv = frozenset(self.unprivileged_values)
            overlap = unpriv & self.privileged_values
            if overlap:
                raise ConfigError(f"attribute {self.attribute!r}: values in both groups: {sorted(overlap)}")
            object.__setattr__(self, "unprivileged_values", unpriv)
        if not self.display_name:
            object.__setattr__(self, "display_name", self.attribute)

    @property
    def name(self) -> str:
        return self.display_name


@dataclass(frozen=True)
class OutcomeSpec:
    label_column: str
    favorable_value: str

    def binarize(self, values: Iterable) -> np.ndarray:
        """1 where a label equals the favorable value, else 0."""
        return (np.asarray(values, dtype=object) == self.favorable_value).astype(np.int8)

    def labels(self, table: Table) -> np.ndarray:
        if self.label_column not in table:
            raise SchemaError(f"label column {self.label_column!r} not in table")
        values = table[self.label_column]
        if table.row_count and not np.any(values == self.favorable_value):
            raise LabelValueError(
                f"favorable value {self.favorable_value!r} never occurs in column {self.label_column!r}"
            )
        return self.binarize(values)


@dataclass(frozen=True)
class GroupIndicator:
    """Per-row group membership: 1 privileged, 0 unprivileged, -1 excluded."""

    values: np.ndarray
    attribute: str = ""

    @property
    def excluded(self) -> int:
        return int(np.count_nonzero(self.values == EXCLUDED))

    def __len__(self):
        return len(self.values)


def binarize(table: Table, spec: ProtectedAttributeSpec) -> GroupIndicator:
    """Map each row to privileged (1), unprivileged (0) or excluded (-1).

    Excluded rows only arise with an explicit unprivileged set; they are
    counted on the indicator and left out of every tally.
    """
    if spec.attribute not in table:
        raise SchemaError(f"protected attribute {spec.attribute!r} not in table")
    if table.kind(spec.attribute) != CATEGORICAL:
        raise ColumnTypeError(f"protected attribute {spec.attribute!r} must be categorical")
    values = table[spec.attribute]
    priv = np.isin(values, list(spec.privileged_values))
    if spec.unprivileged_values == COMPLEMENT:
        unpriv = ~priv
    else:
        unpriv = np.isin(values, list(spec.unprivileged_values))
    indicator = np.full(table.row_count, EXCLUDED, dtype=np.int8)
    indicator[priv] = PRIVILEGED
    indicator[unpriv] = UNPRIVILEGED
    if not priv.any():
        raise EmptyGroup("privileged", spec.display_name)
    if not unpriv.any():
        raise EmptyGroup("unprivileged", spec.display_name)
    return GroupIndicator(indicator, spec.display_name)


@dataclass(frozen=True)
class GroupTally:
    n: int
    fav: int
    tp: int | None = None
    fp: int | None = None
    tn: int | None = None
    fn: int | None = None

    @property
    def has_predictions(self) -> bool:
        return self.tp is not None

    @property
    def fav_rate(self) -> float:
        return self.fav / self.n

    @property
    def actual_positives(self) -> int:
        return self.tp + self.fn

    @property
    def actual_negatives(self) -> int:
        return self.fp + self.tn

    def __add__(self, other: "GroupTally") -> "GroupTally":
        if self.has_predictions != other.has_predictions:
            raise ValueError("cannot add tallies with and without predictions")
        if not self.has_predictions:
            return GroupTally(self.n + other.n, self.fav + other.fav)
        return GroupTally(
            self.n + other.n,
            self.fav + other.fav,
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn + other.fn,
        )

    def is_consistent(self) -> bool:
        counts = [self.n, self.fav]
        if self.has_predictions:
            counts += [self.tp, self.fp, self.tn, self.fn]
        ok = all(c >= 0 for c in counts) and self.fav <= self.n
        if ok and self.has_predictions:
            ok = self.tp + self.fp + self.tn + self.fn == self.n and self.tp + self.fn == self.fav
        return ok


@dataclass(frozen=True)
class GroupCounts:
    privileged: GroupTally
    unprivileged: GroupTally

    @property
    def has_predictions(self) -> bool:
        return self.privileged.has_predictions and self.unprivileged.has_predictions

    def __add__(self, other: "GroupCounts") -> "GroupCounts":
        return GroupCounts(self.privileged + other.privileged, self.unprivileged + other.unprivileged)

    def is_consistent(self) -> bool:
        return self.privileged.is_consistent() and self.unprivileged.is_consistent()

    def group(self, name: str) -> GroupTally:
        return {"privileged": self.privileged, "unprivileged": self.unprivileged}[name]


def _tally(codes: np.ndarray, with_predictions: bool) -> GroupTally:
    # codes = 2*Y + Yp  (or 2*Y when predictions are absent)
    bins = np.bincount(codes, minlength=4)
    tn, fp, fn, tp = (int(b) for b in bins[:4])
    if not with_predictions:
        n = int(bins.sum())
        return GroupTally(n=n, fav=fn + tp)
    return GroupTally(n=tn + fp + fn + tp, fav=fn + tp, tp=tp, fp=fp, tn=tn, fn=fn)


def group_counts(S, Y, Yp=None) -> GroupCounts:
    """Tally rows per group; excluded rows (S == -1) are skipped."""
    S = np.asarray(S.values if isinstance(S, GroupIndicator) else S)
    Y = np.asarray(Y)
    if len(S) != len(Y) or (Yp is not None and len(Yp) != len(S)):
        lengths = [len(S), len(Y)] + ([len(Yp)] if Yp is not None else [])
        raise ShapeError(f"group/outcome vectors differ in length: {lengths}")
    if not np.isin(Y, (0, 1)).all():
        raise ShapeError("outcome vector must be binary (0/1)")
    codes = 2 * Y.astype(np.int64)
    if Yp is not None:
        Yp = np.asarray(Yp)
        if not np.isin(Yp, (0, 1)).all():
            raise ShapeError("prediction vector must be binary (0/1)")
        codes = codes + Yp.astype(np.int64)
    with_predictions = Yp is not None
    return GroupCounts(
        privileged=_tally(codes[S == PRIVILEGED], with_predictions),
        unprivileged=_tally(codes[S == UNPRIVILEGED], with_predictions),
    )
