"""Seeded synthetic tabular data with a controllable favorable-rate gap."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tabular import Table


def make_synthetic(n: int = 5000, seed: int = 0, gap: float = 0.0, base_rate: float = 0.5) -> Table:
    """Rows with a binary ``group`` (``A`` privileged, ``B`` not) and a yes/no ``label``.

    Group ``A`` rows are favorable with probability ``base_rate + gap / 2``
    and group ``B`` rows with ``base_rate - gap / 2``; with ``gap=0`` the label
    is independent of the group. ``signal`` is a noisy copy of the label for
    a classifier to learn from; ``noise`` and ``color`` carry no information.
    """
    p_a, p_b = base_rate + gap / 2, base_rate - gap / 2
    if not (0 <= p_b <= p_a <= 1):
        raise ValueError(f"gap {gap} with base rate {base_rate} gives rates outside [0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    in_a = rng.random(n) < 0.5
    label = rng.random(n) < np.where(in_a, p_a, p_b)
    signal = label * 1.5 + rng.normal(size=n)
    noise = rng.normal(size=n)
    color = rng.choice(np.array(["red", "green", "blue"], dtype=object), size=n)
    return Table.from_columns(
        {
            "group": np.where(in_a, "A", "B").astype(object),
            "signal": np.round(signal, 6),
            "noise": np.round(noise, 6),
            "color": color,
            "label": np.where(label, "yes", "no").astype(object),
        }
    )


def synthetic_config(dataset_path: str, seed: int = 0, n_trees: int = 15, max_depth: int = 8) -> dict:
    """An audit config document for a :func:`make_synthetic` CSV."""
    return {
        "config_version": 1,
        "dataset": {"path": dataset_path},
        "protected_attributes": [
            {"attribute": "group", "privileged": ["A"], "unprivileged": ["B"], "name": "Group"}
        ],
        "outcome": {"label_column": "label", "favorable_value": "yes"},
        "split": {"train_fraction": 0.85, "seed": seed},
        "model": {"n_trees": n_trees, "max_depth": max_depth, "min_leaf": 5, "seed": seed},
        "training_data_available": True,
    }


def write_synthetic(directory, n: int = 5000, seed: int = 0, gap: float = 0.0, **model) -> tuple:
    """Write ``data.csv`` and ``config.json`` into ``directory``; return both paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    data_path = directory / "data.csv"
    data_path.write_bytes(make_synthetic(n, seed, gap).to_csv())
    config_path = directory / "config.json"
    config_path.write_text(json.dumps(synthetic_config("data.csv", seed, **model), indent=2))
    return data_path, config_path
