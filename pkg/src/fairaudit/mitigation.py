"""Favorable-rate rebalancing by random duplication and removal of rows.

Only two row sets are touched: favorable unprivileged rows (duplicated) and
favorable privileged rows (removed). All other rows pass through unchanged,
so the output is a multiset drawn from the input rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyGroup, InfeasibleRebalance
from .protection import PRIVILEGED, UNPRIVILEGED, OutcomeSpec, ProtectedAttributeSpec, binarize
from .tabular import Table

OVERSAMPLE = "oversample_unprivileged"
UNDERSAMPLE = "undersample_privileged"
MIXED = "mixed"
MODES = (OVERSAMPLE, UNDERSAMPLE, MIXED)


@dataclass(frozen=True)
class RebalanceStrategy:
    mode: str = MIXED
    seed: int = 0
    tolerance: float = 0.005

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown rebalance mode {self.mode!r}; expected one of {MODES}")
        if not self.tolerance >= 0:
            raise ConfigError("rebalance tolerance must be >= 0")


def _rounded_candidates(x: float, upper: int) -> list[int]:
    lo = max(0, min(upper, math.floor(x)))
    hi = max(0, min(upper, math.ceil(x)))
    return sorted({lo, hi})


def rebalance_indices(
    table: Table, attr: ProtectedAttributeSpec, outcome: OutcomeSpec, strategy: RebalanceStrategy
) -> np.ndarray:
    """Row indices of the rebalanced table (kept rows in order, then duplicates).

    The target is equal favorable rates. ``oversample_unprivileged`` raises
    the unprivileged rate to the privileged one, ``undersample_privileged``
    lowers the privileged rate to the unprivileged one, and ``mixed`` meets
    at the midpoint.
    """
    S = binarize(table, attr).values
    Y = outcome.labels(table)
    priv_fav = np.flatnonzero((S == PRIVILEGED) & (Y == 1))
    unpriv_fav = np.flatnonzero((S == UNPRIVILEGED) & (Y == 1))
    n_p = int(np.count_nonzero(S == PRIVILEGED))
    n_u = int(np.count_nonzero(S == UNPRIVILEGED))
    if n_p == 0:
        raise EmptyGroup("privileged", attr.display_name)
    if n_u == 0:
        raise EmptyGroup("unprivileged", attr.display_name)
    f_p, f_u = len(priv_fav), len(unpriv_fav)
    r_p, r_u = f_p / n_p, f_u / n_u

    everything = np.arange(table.row_count)
    if abs(r_p - r_u) <= strategy.tolerance:
        return everything
    if r_u > r_p:
        raise InfeasibleRebalance(
            f"{attr.display_name}: unprivileged favorable rate {r_u:.4f} exceeds privileged rate "
            f"{r_p:.4f}; duplicating unprivileged or removing privileged favorables cannot close the gap"
        )

    if strategy.mode == OVERSAMPLE:
        target = r_p
    elif strategy.mode == UNDERSAMPLE:
        target = r_u
    elif f_u == 0:
        # nothing to duplicate, so mixed degrades to pure removal
        target = r_u
    else:
        target = (r_p + r_u) / 2

    # (f_u + k) / (n_u + k) = target  and  (f_p - j) / (n_p - j) = target
    n_dup_exact = 0.0
    if target > r_u:
        if f_u == 0:
            raise InfeasibleRebalance(f"{attr.display_name}: no favorable unprivileged rows to duplicate")
        if target >= 1.0:
            raise InfeasibleRebalance(f"{attr.display_name}: cannot raise the unprivileged rate to 1 by duplication")
        n_dup_exact = (target * n_u - f_u) / (1.0 - target)
    n_del_exact = 0.0
    if target < r_p:
        n_del_exact = (f_p - target * n_p) / (1.0 - target)

    best = None
    for k in _rounded_candidates(n_dup_exact, 2**62):
        for j in _rounded_candidates(n_del_exact, f_p):
            gap = abs((f_p - j) / (n_p - j) - (f_u + k) / (n_u + k)) if n_p > j else math.inf
            if best is None or gap < best[0]:
                best = (gap, k, j)
    gap, n_dup, n_del = best
    if gap > strategy.tolerance:
        raise InfeasibleRebalance(
            f"{attr.display_name}: best achievable rate gap {gap:.4f} exceeds tolerance {strategy.tolerance}"
        )

    rng = np.random.Generator(np.random.PCG64(strategy.seed))
    keep = np.ones(table.row_count, dtype=bool)
    if n_del:
        keep[rng.choice(priv_fav, size=n_del, replace=False)] = False
    duplicates = rng.choice(unpriv_fav, size=n_dup, replace=True) if n_dup else np.empty(0, dtype=np.int64)
    return np.concatenate([everything[keep], np.sort(duplicates)])


def rebalance(
    table: Table, attr: ProtectedAttributeSpec, outcome: OutcomeSpec, strategy: RebalanceStrategy
) -> Table:
    indices = rebalance_indices(table, attr, outcome, strategy)
    if len(indices) == table.row_count and np.array_equal(indices, np.arange(table.row_count)):
        return table
    return table.take(indices)
