"""Audit configuration: JSON file format and validation.

Minimal example::

    {
      "config_version": 1,
      "dataset": {"path": "adult.csv", "missing_token": "?"},
      "cleaning": {"drop_columns": ["fnlwgt"], "strip_chars": "."},
      "class_merges": {"marital-status": {"Widowed": "Unmarried"}},
      "protected_attributes": [
        {"attribute": "sex", "privileged": ["Male"], "unprivileged": "complement", "name": "Gender"}
      ],
      "outcome": {"label_column": "income", "favorable_value": ">50K"},
      "split": {"train_fraction": 0.85, "seed": 42},
      "model": {"n_trees": 50, "max_depth": 12, "min_leaf": 5, "seed": 0},
      "training_data_available": true
    }

Relative paths resolve against the config file's directory. Seeds that are
not given fall back to the ``FAIRAUDIT_SEED`` environment variable, then 0.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..errors import ConfigError
from ..forest import TrainParams
from ..mitigation import RebalanceStrategy
from ..protection import COMPLEMENT, OutcomeSpec, ProtectedAttributeSpec
from ..scoring import DEFAULT_BAND, DEFAULT_BIAS_THRESHOLD, DEFAULT_FAIRNESS_THRESHOLD, ToleranceBand
from ..tabular import DEFAULT_MISSING_TOKEN, KINDS, ColumnSchema

CONFIG_VERSION = 1
SEED_ENV = "FAIRAUDIT_SEED"

_TOP_KEYS = {
    "config_version", "dataset", "cleaning", "class_merges", "protected_attributes", "outcome",
    "split", "model", "predictions", "rebalance", "tolerance_band", "thresholds",
    "training_data_available", "validity_days",
}


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class DatasetOptions:
    path: Path
    missing_token: str = DEFAULT_MISSING_TOKEN
    columns: tuple[str, ...] | None = None
    schema: tuple[ColumnSchema, ...] | None = None


@dataclass(frozen=True)
class RebalanceOptions:
    attribute: str
    strategy: RebalanceStrategy


@dataclass(frozen=True)
class AuditConfig:
    dataset: DatasetOptions
    protected: tuple[ProtectedAttributeSpec, ...]
    outcome: OutcomeSpec
    drop_columns: tuple[str, ...] = ()
    strip_chars: str = ""
    class_merges: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    train_fraction: float = 0.85
    split_seed: int = 0
    train_params: TrainParams | None = field(default_factory=TrainParams)
    predictions_path: Path | None = None
    band: ToleranceBand = field(default_factory=ToleranceBand)
    bias_threshold: float = DEFAULT_BIAS_THRESHOLD
    fairness_threshold: float = DEFAULT_FAIRNESS_THRESHOLD
    training_data_available: bool = True
    validity_days: int = 365
    rebalance: RebalanceOptions | None = None
    # normalized document used for the digest
    document: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.protected:
            raise ConfigError("at least one protected attribute is required")
        names = [p.display_name for p in self.protected]
        if len(set(names)) != len(names):
            raise ConfigError(f"protected attribute names must be unique: {names}")
        if self.training_data_available:
            if self.predictions_path is not None:
                raise ConfigError("external predictions are only used when training_data_available is false")
            if self.train_params is None:
                raise ConfigError("model parameters are required when training data is available")
        else:
            if self.predictions_path is None:
                raise ConfigError("training_data_available is false: an external predictions file is required")
            if self.train_params is not None:
                raise ConfigError("model parameters cannot be used without training data")
            if self.rebalance is not None:
                raise ConfigError("rebalancing needs the training data")
        if self.rebalance is not None:
            self.attribute(self.rebalance.attribute)
        if not isinstance(self.validity_days, int) or self.validity_days < 1:
            raise ConfigError(f"validity_days must be a positive integer, got {self.validity_days!r}")

    def attribute(self, name: str) -> ProtectedAttributeSpec:
        """Look up a protected attribute by display name or column name."""
        for spec in self.protected:
            if name in (spec.display_name, spec.attribute):
                return spec
        raise ConfigError(f"unknown protected attribute {name!r}")

    @property
    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.document)).hexdigest()


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _expect(value, kind, where):
    if not isinstance(value, kind) or (kind in (int, float) and isinstance(value, bool)):
        label = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"{where}: expected {label}, got {value!r}")
    return value


def _check_keys(section: Mapping, allowed: set, where: str):
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")


def _section(doc, key, default=None):
    value = doc.get(key, default)
    if value is None:
        return {}
    return _expect(value, dict, key)


def _seed(section: Mapping, where: str) -> int:
    seed = section.get("seed")
    if seed is None:
        return default_seed()
    return _expect(seed, int, f"{where}.seed")


def config_from_dict(doc: Mapping[str, Any], base_dir: str | os.PathLike = ".") -> AuditConfig:
    _expect(doc, dict, "config")
    _check_keys(doc, _TOP_KEYS, "config")
    version = doc.get("config_version")
    if version != CONFIG_VERSION:
        raise ConfigError(f"config_version must be {CONFIG_VERSION}, got {version!r}")
    base_dir = Path(base_dir)
    normalized: dict[str, Any] = {"config_version": CONFIG_VERSION}

    ds = _section(doc, "dataset")
    _check_keys(ds, {"path", "missing_token", "columns", "schema"}, "dataset")
    if "path" not in ds:
        raise ConfigError("dataset.path is required")
    path_text = _expect(ds["path"], str, "dataset.path")
    schema = None
    if ds.get("schema") is not None:
        raw_schema = _expect(ds["schema"], dict, "dataset.schema")
        for name, kind in raw_schema.items():
            if kind not in KINDS:
                raise ConfigError(f"dataset.schema.{name}: unknown kind {kind!r}")
        schema = tuple(ColumnSchema(n, k) for n, k in raw_schema.items())
    columns = None
    if ds.get("columns") is not None:
        columns = tuple(_expect(c, str, "dataset.columns[]") for c in _expect(ds["columns"], list, "dataset.columns"))
    dataset = DatasetOptions(
        path=(base_dir / path_text),
        missing_token=_expect(ds.get("missing_token", DEFAULT_MISSING_TOKEN), str, "dataset.missing_token"),
        columns=columns,
        schema=schema,
    )
    normalized["dataset"] = {
        "path": path_text,
        "missing_token": dataset.missing_token,
        "columns": list(columns) if columns else None,
        "schema": {c.name: c.kind for c in schema} if schema else None,
    }

    cleaning = _section(doc, "cleaning")
    _check_keys(cleaning, {"drop_columns", "strip_chars"}, "cleaning")
    drop_columns = tuple(_expect(c, str, "cleaning.drop_columns[]") for c in cleaning.get("drop_columns", []))
    strip_chars = _expect(cleaning.get("strip_chars", ""), str, "cleaning.strip_chars")
    normalized["cleaning"] = {"drop_columns": list(drop_columns), "strip_chars": strip_chars}

    merges = {}
    for column, mapping in _section(doc, "class_merges").items():
        _expect(mapping, dict, f"class_merges.{column}")
        merges[column] = {str(k): _expect(v, str, f"class_merges.{column}.{k}") for k, v in mapping.items()}
    normalized["class_merges"] = merges

    raw_attrs = _expect(doc.get("protected_attributes", []), list, "protected_attributes")
    protected = []
    norm_attrs = []
    for i, item in enumerate(raw_attrs):
        where = f"protected_attributes[{i}]"
        _expect(item, dict, where)
        _check_keys(item, {"attribute", "privileged", "unprivileged", "name"}, where)
        if "attribute" not in item or "privileged" not in item:
            raise ConfigError(f"{where}: 'attribute' and 'privileged' are required")
        privileged = [_expect(v, str, f"{where}.privileged[]") for v in _expect(item["privileged"], list, f"{where}.privileged")]
        unpriv = item.get("unprivileged", COMPLEMENT)
        if unpriv != COMPLEMENT:
            unpriv = [_expect(v, str, f"{where}.unprivileged[]") for v in _expect(unpriv, list, f"{where}.unprivileged")]
        spec = ProtectedAttributeSpec(
            attribute=_expect(item["attribute"], str, f"{where}.attribute"),
            privileged_values=frozenset(privileged),
            unprivileged_values=COMPLEMENT if unpriv == COMPLEMENT else frozenset(unpriv),
            display_name=_expect(item.get("name", item["attribute"]), str, f"{where}.name"),
        )
        protected.append(spec)
        norm_attrs.append(
            {
                "attribute": spec.attribute,
                "name": spec.display_name,
                "privileged": sorted(spec.privileged_values),
                "unprivileged": COMPLEMENT if unpriv == COMPLEMENT else sorted(spec.unprivileged_values),
            }
        )
    normalized["protected_attributes"] = norm_attrs

    out = _section(doc, "outcome")
    _check_keys(out, {"label_column", "favorable_value"}, "outcome")
    if "label_column" not in out or "favorable_value" not in out:
        raise ConfigError("outcome.label_column and outcome.favorable_value are required")
    outcome = OutcomeSpec(
        _expect(out["label_column"], str, "outcome.label_column"),
        _expect(out["favorable_value"], str, "outcome.favorable_value"),
    )
    normalized["outcome"] = {"label_column": outcome.label_column, "favorable_value": outcome.favorable_value}

    sp = _section(doc, "split")
    _check_keys(sp, {"train_fraction", "seed"}, "split")
    train_fraction = _expect(sp.get("train_fraction", 0.85), (int, float), "split.train_fraction")
    if not 0 < train_fraction < 1:
        raise ConfigError(f"split.train_fraction must lie in (0, 1), got {train_fraction!r}")
    split_seed = _seed(sp, "split")
    normalized["split"] = {"train_fraction": train_fraction, "seed": split_seed}

    available = _expect(doc.get("training_data_available", True), bool, "training_data_available")
    normalized["training_data_available"] = available

    predictions_text = doc.get("predictions")
    predictions_path = None
    if predictions_text is not None:
        predictions_path = base_dir / _expect(predictions_text, str, "predictions")
    normalized["predictions"] = predictions_text

    train_params = None
    if "model" in doc or available:
        model = _section(doc, "model")
        _check_keys(model, {"n_trees", "max_depth", "min_leaf", "feature_subsample", "seed", "max_bins"}, "model")
        kwargs = {k: model[k] for k in ("n_trees", "max_depth", "min_leaf", "feature_subsample", "max_bins") if k in model}
        train_params = TrainParams(seed=_seed(model, "model"), **kwargs)
        normalized["model"] = {
            "n_trees": train_params.n_trees,
            "max_depth": train_params.max_depth,
            "min_leaf": train_params.min_leaf,
            "feature_subsample": train_params.feature_subsample,
            "max_bins": train_params.max_bins,
            "seed": train_params.seed,
        }

    rebalance = None
    rb = doc.get("rebalance")
    if rb is not None:
        _expect(rb, dict, "rebalance")
        _check_keys(rb, {"attribute", "mode", "seed", "tolerance"}, "rebalance")
        if "attribute" not in rb:
            raise ConfigError("rebalance.attribute is required")
        strategy = RebalanceStrategy(
            mode=_expect(rb.get("mode", "mixed"), str, "rebalance.mode"),
            seed=_seed(rb, "rebalance"),
            tolerance=_expect(rb.get("tolerance", 0.005), (int, float), "rebalance.tolerance"),
        )
        rebalance = RebalanceOptions(_expect(rb["attribute"], str, "rebalance.attribute"), strategy)
        normalized["rebalance"] = {
            "attribute": rebalance.attribute,
            "mode": strategy.mode,
            "seed": strategy.seed,
            "tolerance": strategy.tolerance,
        }

    band = ToleranceBand(_expect(doc.get("tolerance_band", DEFAULT_BAND), (int, float), "tolerance_band"))
    th = _section(doc, "thresholds")
    _check_keys(th, {"bias_index", "fairness_score"}, "thresholds")
    bias_threshold = _expect(th.get("bias_index", DEFAULT_BIAS_THRESHOLD), (int, float), "thresholds.bias_index")
    fairness_threshold = _expect(
        th.get("fairness_score", DEFAULT_FAIRNESS_THRESHOLD), (int, float), "thresholds.fairness_score"
    )
    for name, value in (("bias_index", bias_threshold), ("fairness_score", fairness_threshold)):
        if not 0 <= value <= 1:
            raise ConfigError(f"thresholds.{name} must lie in [0, 1], got {value!r}")
    validity_days = _expect(doc.get("validity_days", 365), int, "validity_days")
    normalized.update(
        tolerance_band=band.half_width,
        thresholds={"bias_index": bias_threshold, "fairness_score": fairness_threshold},
        validity_days=validity_days,
    )

    return AuditConfig(
        dataset=dataset,
        protected=tuple(protected),
        outcome=outcome,
        drop_columns=drop_columns,
        strip_chars=strip_chars,
        class_merges=merges,
        train_fraction=float(train_fraction),
        split_seed=split_seed,
        train_params=train_params,
        predictions_path=predictions_path,
        band=band,
        bias_threshold=float(bias_threshold),
        fairness_threshold=float(fairness_threshold),
        training_data_available=available,
        validity_days=validity_days,
        rebalance=rebalance,
        document=normalized,
    )


def load_config(path: str | os.PathLike) -> AuditConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(doc, path.parent)
