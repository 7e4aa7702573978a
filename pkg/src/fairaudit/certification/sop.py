"""Run the twelve-step certification procedure and assemble the report."""

from __future__ import annotations

import datetime as _dt
import hashlib
from dataclasses import dataclass

import numpy as np

from ..errors import FairAuditError
from ..forest import load_predictions, predict, train
from ..metrics import POST_TRAINING, PRE_TRAINING, compute_metric_set
from ..mitigation import rebalance_indices
from ..protection import binarize, group_counts
from ..scoring import audit_attribute, score_audits, verdict
from ..tabular import CATEGORICAL, Table, clean, load_csv, merge_classes, one_hot_encode, split_indices
from .config import AuditConfig
from .plots import plot_data
from .report import DONE, FAILED, SKIP_DISCLOSURE, SKIPPED, FairnessReport, SopStep

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


@dataclass(frozen=True)
class PreparedData:
    loaded: Table
    cleaned: Table


def prepare_dataset(config: AuditConfig) -> PreparedData:
    """Load the configured CSV, then apply the cleaning rules and class merges."""
    ds = config.dataset
    loaded = load_csv(ds.path, ds.schema, missing_token=ds.missing_token, usecols=ds.columns)
    cleaned = clean(loaded, config.drop_columns, config.strip_chars)
    for column, mapping in config.class_merges.items():
        cleaned = merge_classes(cleaned, column, mapping)
    return PreparedData(loaded, cleaned)


def encode_features(table: Table, label_column: str) -> Table:
    cats = [c.name for c in table.schema if c.kind == CATEGORICAL and c.name != label_column]
    return one_hot_encode(table, cats)


class _Trace:
    def __init__(self):
        self.steps: list[SopStep] = []

    def record(self, step: int, status: str, detail: str = ""):
        self.steps.append(SopStep(step, status, detail))

    def fail(self, step: int, exc: FairAuditError):
        self.record(step, FAILED, f"{type(exc).__name__}: {exc}")
        for later in range(step + 1, 13):
            self.record(later, SKIPPED, f"not reached: step {step} failed")
        exc.sop_trace = list(self.steps)


def _fmt_metrics(values, band) -> str:
    return ", ".join(
        f"{mv.metric_id} {mv.value:.4f} ({'in band' if band.contains(mv) else 'out of band'})" for mv in values
    )


def _stamp(now: _dt.datetime | None, days: int) -> tuple[str, str]:
    if now is None:
        now = _dt.datetime.now(_dt.timezone.utc)
    elif now.tzinfo is None:
        now = now.replace(tzinfo=_dt.timezone.utc)
    now = now.astimezone(_dt.timezone.utc).replace(microsecond=0)
    return now.strftime(TIMESTAMP_FORMAT), (now + _dt.timedelta(days=days)).strftime(TIMESTAMP_FORMAT)


def run_certification(config: AuditConfig, now: _dt.datetime | None = None) -> FairnessReport:
    """Execute the procedure end to end.

    A library error aborts the run; the exception is re-raised with a
    ``sop_trace`` attribute whose last executed step is marked failed.
    """
    trace = _Trace()
    current = 1
    try:
        # 1: protected attributes
        prepared = prepare_dataset(config)
        table = prepared.cleaned
        for spec in config.protected:
            binarize(table, spec)  # existence, kind and nonempty groups
        trace.record(1, DONE, "protected attributes: " + ", ".join(s.display_name for s in config.protected))

        # 2: privileged / unprivileged classes
        current = 2
        parts = []
        for spec in config.protected:
            unpriv = "all other values" if isinstance(spec.unprivileged_values, str) else ", ".join(sorted(spec.unprivileged_values))
            parts.append(f"{spec.display_name}: privileged {', '.join(sorted(spec.privileged_values))}; unprivileged {unpriv}")
        trace.record(2, DONE, "; ".join(parts))

        # 3: tolerance band
        current = 3
        band = config.band
        trace.record(3, DONE, f"+/-{band.half_width:g} around each metric's ideal value")

        counts: dict[str, dict[str, object]] = {s.display_name: {} for s in config.protected}
        pre_sets = {}
        dataset_info = {"rows": table.row_count, "dropped_rows": prepared.loaded.dropped_rows}
        encoded = encode_features(table, config.outcome.label_column)

        if config.training_data_available:
            # 4: training-data metrics
            current = 4
            train_idx, test_idx = split_indices(table.row_count, config.train_fraction, config.split_seed)
            train_raw, test_raw = table.take(train_idx), table.take(test_idx)
            train_enc, test_enc = encoded.take(train_idx), encoded.take(test_idx)
            if config.rebalance is not None:
                spec = config.attribute(config.rebalance.attribute)
                idx = rebalance_indices(train_raw, spec, config.outcome, config.rebalance.strategy)
                train_raw, train_enc = train_raw.take(idx), train_enc.take(idx)
                dataset_info["rebalanced_attribute"] = spec.display_name
                dataset_info["rebalance_mode"] = config.rebalance.strategy.mode
            dataset_info.update(train_rows=train_raw.row_count, test_rows=test_raw.row_count)
            y_train = config.outcome.labels(train_raw)
            details = []
            for spec in config.protected:
                c = group_counts(binarize(train_raw, spec), y_train)
                counts[spec.display_name][PRE_TRAINING] = c
                pre_sets[spec.display_name] = compute_metric_set(c, PRE_TRAINING, spec.display_name)
                details.append(f"{spec.display_name}: {_fmt_metrics(pre_sets[spec.display_name].values, band)}")
            trace.record(4, DONE, "; ".join(details))

            # 5: train
            current = 5
            model = train(train_enc, config.outcome, config.train_params)
            trace.record(
                5, DONE, f"{config.train_params.n_trees} trees on {train_enc.row_count} rows, {len(model.feature_names)} features"
            )

            # 6: predict
            current = 6
            y_pred = predict(model, test_enc)
            y_test = config.outcome.labels(test_raw)
            accuracy = float(np.mean(y_pred == y_test))
            model_info = {
                "source": "internal forest",
                "n_trees": config.train_params.n_trees,
                "max_depth": config.train_params.max_depth,
                "min_leaf": config.train_params.min_leaf,
                "seed": config.train_params.seed,
                "test_accuracy": accuracy,
            }
            trace.record(6, DONE, f"predicted {len(y_pred)} test rows; accuracy {accuracy:.4f}")
            evaluated = test_raw
        else:
            trace.record(4, SKIPPED, "training data not available to the certifier")
            trace.record(5, SKIPPED, "training data not available to the certifier")
            current = 6
            n_file_rows = table.row_count + prepared.loaded.dropped_rows
            domain = set(np.unique(table[config.outcome.label_column]).tolist())
            preds = load_predictions(config.predictions_path, config.outcome, n_file_rows, domain)
            y_pred = preds[prepared.loaded.source_rows]
            y_test = config.outcome.labels(table)
            accuracy = float(np.mean(y_pred == y_test))
            model_info = {"source": "external predictions", "predictions_file": config.predictions_path.name, "test_accuracy": accuracy}
            dataset_info.update(test_rows=table.row_count)
            trace.record(6, DONE, f"loaded {n_file_rows} external predictions; {len(y_pred)} rows evaluated")
            evaluated = table

        # 7: outcome metrics
        current = 7
        post_sets = {}
        details = []
        excluded = {}
        for spec in config.protected:
            S = binarize(evaluated, spec)
            excluded[spec.display_name] = S.excluded
            c = group_counts(S, y_test, y_pred)
            counts[spec.display_name][POST_TRAINING] = c
            post_sets[spec.display_name] = compute_metric_set(c, POST_TRAINING, spec.display_name)
            details.append(f"{spec.display_name}: {_fmt_metrics(post_sets[spec.display_name].values, band)}")
        dataset_info["excluded_rows"] = excluded
        trace.record(7, DONE, "; ".join(details))

        # 9 before 8: the plot series are read off the audits
        audits = []
        for spec in config.protected:
            name = spec.display_name
            metrics = (pre_sets[name].values if name in pre_sets else ()) + post_sets[name].values
            audits.append(audit_attribute(name, metrics, config.bias_threshold, reduced_basis=name not in pre_sets))
        result = score_audits(audits, config.fairness_threshold)
        decision = verdict(result, band, config.bias_threshold, config.fairness_threshold)

        current = 8
        # placeholder report only feeds plot_data
        partial = FairnessReport("", "", [], result, decision, [], "", "")
        series = plot_data(partial)
        outside = sum(not p.in_band for pts in series.values() for p in pts)
        trace.record(8, DONE, f"{len(series)} series; {outside} point(s) outside the band")

        current = 9
        trace.record(
            9,
            DONE,
            ", ".join(f"BI[{a.attribute}] {a.bias_index:.4f}" for a in audits) + f"; FS {result.fairness_score:.4f}",
        )

        current = 10
        trace.record(
            10,
            DONE,
            ("certificate issued" if decision.fair else "certificate denied")
            + f": FS {result.fairness_score:.4f} vs threshold {config.fairness_threshold:g}",
        )

        current = 11
        limitations = []
        if not config.training_data_available:
            limitations.append(SKIP_DISCLOSURE)
            limitations.append(
                "Bias Indexes are computed over the three outcome metrics (EOD, EMOD, AOD) only."
            )
            trace.record(11, DONE, "limitation disclosed: pre-training metrics unchecked")
        else:
            trace.record(11, SKIPPED, "training data was available; nothing to disclose")

        current = 12
        issued_at, valid_until = _stamp(now, config.validity_days)
        trace.record(12, DONE, f"valid for {config.validity_days} days; recertify by {valid_until}")
    except FairAuditError as exc:
        trace.fail(current, exc)
        raise

    report = FairnessReport(
        config_digest=config.digest,
        dataset_hash=hashlib.sha256(prepared.loaded.to_csv()).hexdigest(),
        sop_trace=trace.steps,
        score=result,
        verdict=decision,
        limitations=limitations,
        issued_at=issued_at,
        valid_until=valid_until,
        training_data_available=config.training_data_available,
        group_counts=counts,
        dataset=dataset_info,
        model=model_info,
    )
    report.check_consistency()
    return report
