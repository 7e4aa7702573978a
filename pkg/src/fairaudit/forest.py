"""A small bagged decision-tree classifier (Gini splits, majority vote).

Split search works on per-feature bin codes: each numeric feature is
discretized on its sorted distinct values (or quantiles when there are
more than ``max_bins``), so one ``np.bincount`` yields the class histogram
of every candidate threshold in a node.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .errors import ConfigError, DegenerateLabelError, LabelValueError, ParseError, SchemaError, ShapeError
from .protection import OutcomeSpec
from .tabular import CATEGORICAL, Table

LEAF = -1


@dataclass(frozen=True)
class TrainParams:
    n_trees: int = 50
    max_depth: int = 12
    min_leaf: int = 5
    # fraction of features tried per split; None means floor(sqrt(n_features))
    feature_subsample: float | None = None
    seed: int = 0
    max_bins: int = 255

    def __post_init__(self):
        for name in ("n_trees", "max_depth", "min_leaf", "max_bins"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.feature_subsample is not None and not 0.0 < self.feature_subsample <= 1.0:
            raise ConfigError(f"feature_subsample must lie in (0, 1], got {self.feature_subsample!r}")

    def features_per_split(self, n_features: int) -> int:
        if self.feature_subsample is None:
            return max(1, int(math.isqrt(n_features)))
        return max(1, min(n_features, int(round(self.feature_subsample * n_features))))


@dataclass(frozen=True)
class DecisionTree:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf holding ``label[i]``.

    Internal node ``i`` sends a row left when ``x[feature[i]] <= threshold[i]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray

    @classmethod
    def constant(cls, label: int) -> "DecisionTree":
        return cls(
            np.array([LEAF], dtype=np.int32),
            np.zeros(1),
            np.array([LEAF], dtype=np.int32),
            np.array([LEAF], dtype=np.int32),
            np.array([label], dtype=np.int8),
        )

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = rows[self.feature[node] != LEAF]
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return self.label[node]


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[DecisionTree, ...]
    feature_names: tuple[str, ...]
    n_train_rows: int

    def votes(self, table: Table) -> np.ndarray:
        X = feature_matrix(table, self.feature_names)
        return np.sum([tree.predict(X) for tree in self.trees], axis=0, dtype=np.int64)


def feature_matrix(table: Table, names: Sequence[str]) -> np.ndarray:
    missing = [n for n in names if n not in table]
    if missing:
        raise SchemaError(f"table lacks model feature column(s): {missing}")
    bad = [n for n in names if table.kind(n) == CATEGORICAL]
    if bad:
        raise SchemaError(f"categorical feature column(s) must be one-hot encoded first: {bad}")
    X = np.empty((table.row_count, len(names)), dtype=np.float64)
    for j, name in enumerate(names):
        X[:, j] = table[name]
    return X


def _bin_edges(col: np.ndarray, max_bins: int) -> np.ndarray:
    edges = np.unique(col)
    if len(edges) > max_bins:
        qs = np.quantile(col, np.linspace(0, 1, max_bins + 1)[1:], method="lower")
        edges = np.unique(qs)
    return edges


def _bin(X: np.ndarray, max_bins: int) -> tuple[np.ndarray, list[np.ndarray]]:
    edges = [_bin_edges(X[:, j], max_bins) for j in range(X.shape[1])]
    codes = np.empty(X.shape, dtype=np.int32)
    for j, e in enumerate(edges):
        codes[:, j] = np.minimum(np.searchsorted(e, X[:, j], side="left"), len(e) - 1)
    return codes, edges


class _TreeBuilder:
    def __init__(self, X, codes, edges, y, params: TrainParams, rng: np.random.Generator):
        self.X = X
        self.codes = codes
        self.edges = edges
        self.y = y.astype(np.float64)
        self.params = params
        self.rng = rng
        self.n_features = codes.shape[1]
        self.k = params.features_per_split(self.n_features)
        self.n_bins = max(len(e) for e in edges)

    def _best_split(self, idx, w, wy):
        """(feature, bin) of the lowest weighted Gini among sampled features, or None."""
        total_w, total_pos = w.sum(), wy.sum()
        parent = total_pos * (total_w - total_pos) / total_w
        min_leaf = self.params.min_leaf
        order = self.rng.permutation(self.n_features)
        B = self.n_bins
        for start in range(0, self.n_features, self.k):
            feats = order[start : start + self.k]
            sub = self.codes[idx[:, None], feats[None, :]]
            flat = (sub + (np.arange(len(feats)) * B)[None, :]).ravel()
            size = len(feats) * B
            left_w = np.cumsum(np.bincount(flat, weights=np.repeat(w, len(feats)), minlength=size).reshape(-1, B), axis=1)
            left_pos = np.cumsum(np.bincount(flat, weights=np.repeat(wy, len(feats)), minlength=size).reshape(-1, B), axis=1)
            right_w = total_w - left_w
            right_pos = total_pos - left_pos
            valid = (left_w >= min_leaf) & (right_w >= min_leaf)
            if not valid.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                impurity = left_pos * (left_w - left_pos) / left_w + right_pos * (right_w - right_pos) / right_w
            impurity = np.where(valid, impurity, np.inf)
            best = int(np.argmin(impurity))
            f_local, b = divmod(best, B)
            if impurity.flat[best] < parent - 1e-12:
                return int(feats[f_local]), b
            # sampled features were usable but useless: stop, as a full search would
            return None
        return None

    def build(self, idx, w) -> DecisionTree:
        feature, threshold, left, right, label = [], [], [], [], []

        def new_node():
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            label.append(0)
            return len(feature) - 1

        root = new_node()
        stack = [(root, idx, w, 0)]
        while stack:
            node, idx, w, depth = stack.pop()
            wy = w * self.y[idx]
            total_w, total_pos = w.sum(), wy.sum()
            # ties go to the unfavorable class
            label[node] = 1 if 2 * total_pos > total_w else 0
            if depth >= self.params.max_depth or total_pos == 0 or total_pos == total_w:
                continue
            if total_w < 2 * self.params.min_leaf:
                continue
            split = self._best_split(idx, w, wy)
            if split is None:
                continue
            f, b = split
            go_left = self.codes[idx, f] <= b
            feature[node] = f
            # midway between the node's neighbouring values, so rows unseen by this tree split sensibly
            lo, hi = self.X[idx[go_left], f].max(), self.X[idx[~go_left], f].min()
            mid = lo + (hi - lo) / 2
            threshold[node] = float(mid if mid < hi else lo)
            left[node] = new_node()
            right[node] = new_node()
            stack.append((right[node], idx[~go_left], w[~go_left], depth + 1))
            stack.append((left[node], idx[go_left], w[go_left], depth + 1))

        return DecisionTree(
            np.asarray(feature, dtype=np.int32),
            np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.int32),
            np.asarray(right, dtype=np.int32),
            np.asarray(label, dtype=np.int8),
        )


def train(
    table: Table,
    outcome: OutcomeSpec,
    params: TrainParams = TrainParams(),
    features: Sequence[str] | None = None,
) -> ForestModel:
    """Grow ``params.n_trees`` trees on bootstrap resamples of ``table``.

    Features default to every column except the label. Tree ``i`` draws its
    bootstrap and feature subsets from the ``i``-th child of
    ``SeedSequence(params.seed)``, so a fixed seed gives a fixed model.
    """
    y = outcome.labels(table)
    if y.min() == y.max():
        raise DegenerateLabelError(f"label column {outcome.label_column!r} has a single class")
    names = tuple(n for n in table.names if n != outcome.label_column) if features is None else tuple(features)
    if not names:
        raise SchemaError("no feature columns to train on")
    X = feature_matrix(table, names)
    codes, edges = _bin(X, params.max_bins)
    n = table.row_count
    trees = []
    for child in np.random.SeedSequence(params.seed).spawn(params.n_trees):
        rng = np.random.Generator(np.random.PCG64(child))
        counts = np.bincount(rng.integers(0, n, n), minlength=n)
        idx = np.flatnonzero(counts)
        builder = _TreeBuilder(X, codes, edges, y, params, rng)
        trees.append(builder.build(idx, counts[idx].astype(np.float64)))
    return ForestModel(tuple(trees), names, n)


def predict(model: ForestModel, table: Table) -> np.ndarray:
    """Majority vote of the trees; an exact tie predicts 0."""
    votes = model.votes(table)
    return (2 * votes > len(model.trees)).astype(np.int8)


def load_predictions(
    source: bytes | BinaryIO | str | os.PathLike,
    outcome: OutcomeSpec,
    expected_length: int | None = None,
    domain: Iterable[str] | None = None,
) -> np.ndarray:
    """Read a headerless single-column CSV of label values into a 0/1 vector.

    ``domain`` lists the admissible label values (the favorable value is
    always admissible); anything else raises :class:`LabelValueError`.
    """
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"predictions are not valid UTF-8: {exc}") from exc
    values = []
    for row_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row:
            continue
        if len(row) != 1:
            raise ParseError(f"expected a single column, found {len(row)}", row=row_no)
        values.append(row[0].strip())
    if expected_length is not None and len(values) != expected_length:
        raise ShapeError(f"{len(values)} predictions for {expected_length} rows")
    if domain is not None:
        allowed = set(domain) | {outcome.favorable_value}
        unknown = sorted(set(values) - allowed)
        if unknown:
            raise LabelValueError(f"unknown label value(s) in predictions: {unknown[:5]}")
    return outcome.binarize(values)
