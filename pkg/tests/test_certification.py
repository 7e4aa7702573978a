import datetime as dt
import json
import re

import numpy as np
import pytest

from fairaudit.certification import (
    SKIP_DISCLOSURE,
    config_from_dict,
    from_json,
    load_config,
    plot_data,
    render_certificate,
    render_svg,
    run_certification,
    to_json,
    write_plots,
)
from fairaudit.certification.config import SEED_ENV, default_seed
from fairaudit.errors import ConfigError, EmptyGroup, FairAuditError, UndefinedRatio
from fairaudit.synthetic import make_synthetic, synthetic_config, write_synthetic
from fairaudit.tabular import Table, load_csv, split_indices

from .conftest import CONFIGS

NOW = dt.datetime(2026, 1, 2, 3, 4, 5, tzinfo=dt.timezone.utc)


def mask_timestamps(data: bytes) -> bytes:
    return re.sub(rb"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ", b"<ts>", data)


@pytest.fixture(scope="module")
def german_report():
    return run_certification(load_config(CONFIGS / "german_original.json"), now=NOW)


def external_setup(tmp_path, n=400, seed=0, labels=None):
    """Synthetic data plus a predictions file; training data withheld."""
    table = make_synthetic(n, seed)
    (tmp_path / "data.csv").write_bytes(table.to_csv())
    preds = table["label"] if labels is None else labels
    (tmp_path / "preds.csv").write_text("".join(f"{v}\n" for v in preds))
    doc = synthetic_config("data.csv", seed)
    del doc["model"], doc["split"]
    doc.update(training_data_available=False, predictions="preds.csv")
    return doc


def test_config_strict_keys(tmp_path):
    doc = synthetic_config("data.csv")
    doc["colour"] = 1
    with pytest.raises(ConfigError, match="colour"):
        config_from_dict(doc, tmp_path)


def test_config_needs_protected_attribute(tmp_path):
    doc = synthetic_config("data.csv")
    doc["protected_attributes"] = []
    with pytest.raises(ConfigError):
        config_from_dict(doc, tmp_path)


def test_config_withheld_training_needs_predictions(tmp_path):
    doc = synthetic_config("data.csv")
    doc["training_data_available"] = False
    with pytest.raises(ConfigError):
        config_from_dict(doc, tmp_path)


def test_config_predictions_exclusive_with_training(tmp_path):
    doc = synthetic_config("data.csv")
    doc["predictions"] = "p.csv"
    with pytest.raises(ConfigError):
        config_from_dict(doc, tmp_path)


def test_config_resolves_relative_paths(tmp_path):
    cfg = config_from_dict(synthetic_config("sub/data.csv"), tmp_path)
    assert cfg.dataset.path == tmp_path / "sub" / "data.csv"


def test_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json")


def test_config_digest_tracks_content(tmp_path):
    a = config_from_dict(synthetic_config("data.csv", seed=1), tmp_path)
    b = config_from_dict(synthetic_config("data.csv", seed=1), tmp_path)
    c = config_from_dict(synthetic_config("data.csv", seed=2), tmp_path)
    assert a.digest == b.digest != c.digest


def test_default_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert default_seed() == 0
    monkeypatch.setenv(SEED_ENV, "17")
    assert default_seed() == 17
    monkeypatch.setenv(SEED_ENV, "x")
    with pytest.raises(ConfigError):
        default_seed()


def test_shipped_configs_parse():
    for path in sorted(CONFIGS.glob("*.json")):
        load_config(path)


def test_german_report_structure(german_report):
    r = german_report
    assert [s.step for s in r.sop_trace] == list(range(1, 13))
    assert [s.status for s in r.sop_trace if s.step != 11] == ["done"] * 11
    assert r.sop_trace[10].status == "skipped"
    assert r.limitations == []
    (audit,) = r.attribute_audits
    assert audit.attribute == "Sex"
    assert [m.metric_id for m in audit.metrics] == ["SPD", "DI", "EOD", "EMOD", "AOD"]
    assert r.dataset["train_rows"] == 850 and r.dataset["test_rows"] == 150
    assert r.issued_at == "2026-01-02T03:04:05Z" and r.valid_until == "2027-01-02T03:04:05Z"


def test_german_pre_training_by_hand(german_report):
    # oracle: favorable rates counted directly on the training split
    t = load_csv(CONFIGS.parent / "data" / "german.csv")
    train_idx, _ = split_indices(t.row_count, 0.85, 42)
    sex, good = t["sex"][train_idx], t["risk"][train_idx] == "good"
    r_m, r_f = good[sex == "male"].mean(), good[sex == "female"].mean()
    audit = german_report.audit("Sex")
    assert audit.metric("SPD").value == pytest.approx(r_f - r_m, abs=1e-12)
    assert audit.metric("DI").value == pytest.approx(r_f / r_m, abs=1e-12)


def test_json_round_trip(german_report):
    data = to_json(german_report)
    again = from_json(data)
    assert to_json(again) == data
    doc = json.loads(data)
    assert doc["fairness_score"] == pytest.approx(german_report.fairness_score, abs=1e-6)


def test_tampered_report_rejected(german_report):
    doc = json.loads(to_json(german_report))
    doc["fairness_score"] = 0.99
    with pytest.raises(FairAuditError):
        to_json(from_json(json.dumps(doc)))


def test_certificate_mentions_verdict_and_scores(german_report):
    text = render_certificate(german_report)
    status = "CERTIFIED" if german_report.fair else "NOT CERTIFIED"
    assert text.startswith(f"# Fairness Certificate: {status}")
    assert f"{german_report.fairness_score:.4f}" in text
    assert "Sex" in text and german_report.valid_until in text


def test_plot_series(german_report, tmp_path):
    series = plot_data(german_report)
    points = series["Sex"]
    assert [p.metric_id for p in points] == ["SPD", "DI", "EOD", "EMOD", "AOD"]
    di = points[1]
    assert (di.band_low, di.band_high) == pytest.approx((0.9, 1.1))
    svg = render_svg("Sex", points)
    assert svg.startswith("<svg") and svg.count('class="bar"') == 5
    paths = write_plots(german_report, tmp_path)
    assert [p.name for p in paths] == ["Sex.svg"]


def test_external_predictions_path(tmp_path):
    cfg = config_from_dict(external_setup(tmp_path), tmp_path)
    r = run_certification(cfg, now=NOW)
    status = {s.step: s.status for s in r.sop_trace}
    assert status[4] == status[5] == "skipped"
    assert status[11] == "done"
    assert SKIP_DISCLOSURE in r.limitations
    (audit,) = r.attribute_audits
    assert audit.reduced_basis
    assert [m.metric_id for m in audit.metrics] == ["EOD", "EMOD", "AOD"]
    assert SKIP_DISCLOSURE in render_certificate(r)
    assert SKIP_DISCLOSURE in json.loads(to_json(r))["limitations"]


def test_external_predictions_perfect_classifier_is_fair(tmp_path):
    # predictions equal to labels: TPR 1 and FPR 0 in both groups, so BI 0
    r = run_certification(config_from_dict(external_setup(tmp_path), tmp_path), now=NOW)
    assert r.fairness_score == pytest.approx(1.0)
    assert r.fair


def test_undefined_ratio_marks_step_4(tmp_path):
    table = make_synthetic(200, 0)
    labels = np.where(table["group"] == "A", "no", table["label"]).astype(object)
    cols = {n: table[n] for n in table.names}
    cols["label"] = labels
    (tmp_path / "data.csv").write_bytes(Table.from_columns(cols).to_csv())
    cfg = config_from_dict(synthetic_config("data.csv"), tmp_path)
    with pytest.raises(UndefinedRatio) as info:
        run_certification(cfg)
    trace = info.value.sop_trace
    assert [s.status for s in trace][:4] == ["done", "done", "done", "failed"]
    assert all(s.status == "skipped" for s in trace[4:])


def test_empty_group_fails_step_1(tmp_path):
    data_path, config_path = write_synthetic(tmp_path, n=100)
    doc = json.loads(config_path.read_text())
    doc["protected_attributes"][0]["privileged"] = ["Z"]
    with pytest.raises(EmptyGroup) as info:
        run_certification(config_from_dict(doc, tmp_path))
    assert info.value.sop_trace[0].status == "failed"


def test_determinism_modulo_timestamps():
    cfg = load_config(CONFIGS / "german_sex_balanced.json")
    a = to_json(run_certification(cfg, now=NOW))
    b = to_json(run_certification(cfg, now=NOW + dt.timedelta(days=3)))
    assert a != b
    assert mask_timestamps(a) == mask_timestamps(b)


def test_rebalance_in_config_balances_training_split():
    r = run_certification(load_config(CONFIGS / "german_sex_balanced.json"), now=NOW)
    audit = r.audit("Sex")
    assert abs(audit.metric("SPD").value) <= 0.01
    assert r.dataset["rebalanced_attribute"] == "Sex"
