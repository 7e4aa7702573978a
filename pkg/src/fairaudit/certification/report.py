"""The fairness report, its canonical JSON form, and the certificate text."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from ..errors import FairAuditError
from ..metrics import METRIC_NAMES, PHASE_METRICS, POST_TRAINING, MetricValue
from ..protection import GroupCounts, GroupTally
from ..scoring import (
    AttributeAudit,
    FairnessScoreResult,
    ToleranceBand,
    Verdict,
    bias_index,
    fairness_score,
)

REPORT_VERSION = "1"

DONE = "done"
SKIPPED = "skipped"
FAILED = "failed"

STEP_TITLES = {
    1: "Identify protected attributes",
    2: "Identify privileged and unprivileged classes",
    3: "Define the tolerance band",
    4: "Check the training dataset (SPD, DI)",
    5: "Train the AI system",
    6: "Run the system on the test dataset",
    7: "Check the outcomes (EOD, EMOD, AOD)",
    8: "Plot the metrics against the tolerance band",
    9: "Compute Bias Indexes and the Fairness Score",
    10: "Issue or deny certification",
    11: "Disclose unchecked metrics",
    12: "Schedule recertification",
}

SKIP_DISCLOSURE = (
    "Statistical parity and disparate impact have not been checked due to "
    "non-availability of the training dataset."
)

# recomputation tolerance; covers the 6-decimal rounding of a parsed report
_CONSISTENCY_TOL = 1e-5


@dataclass(frozen=True)
class SopStep:
    step: int
    status: str
    detail: str = ""

    @property
    def title(self) -> str:
        return STEP_TITLES[self.step]


@dataclass(frozen=True)
class PlotPoint:
    metric_id: str
    value: float
    ideal: float
    band_low: float
    band_high: float

    @property
    def in_band(self) -> bool:
        return self.band_low - 1e-12 <= self.value <= self.band_high + 1e-12


@dataclass
class FairnessReport:
    config_digest: str
    dataset_hash: str
    sop_trace: list[SopStep]
    score: FairnessScoreResult
    verdict: Verdict
    limitations: list[str]
    issued_at: str
    valid_until: str
    training_data_available: bool = True
    group_counts: dict[str, dict[str, GroupCounts]] = field(default_factory=dict)
    dataset: dict[str, Any] = field(default_factory=dict)
    model: dict[str, Any] = field(default_factory=dict)
    report_version: str = REPORT_VERSION

    @property
    def attribute_audits(self) -> tuple[AttributeAudit, ...]:
        return self.score.attribute_audits

    @property
    def fairness_score(self) -> float:
        return self.score.fairness_score

    @property
    def fair(self) -> bool:
        return self.verdict.fair

    def audit(self, attribute: str) -> AttributeAudit:
        for a in self.attribute_audits:
            if a.attribute == attribute:
                return a
        raise KeyError(attribute)

    def check_consistency(self, tol: float = _CONSISTENCY_TOL):
        """Raise if the stored Bias Indexes or Fairness Score disagree with the stored metrics."""
        for audit in self.attribute_audits:
            bi = bias_index(audit.metrics)
            if abs(bi - audit.bias_index) > tol:
                raise FairAuditError(f"{audit.attribute}: stored bias index {audit.bias_index} != recomputed {bi}")
        fs = fairness_score([a.bias_index for a in self.attribute_audits])
        if abs(fs - self.fairness_score) > tol:
            raise FairAuditError(f"stored fairness score {self.fairness_score} != recomputed {fs}")
        steps = [s.step for s in self.sop_trace]
        if steps != list(range(1, 13)):
            raise FairAuditError(f"SOP trace must list steps 1..12 once each, got {steps}")


# -------------------------------------------------------------------- JSON --


class _Fixed(float):
    """A float that the canonical writer emits with six decimals."""


def _fixed(x: float) -> _Fixed:
    x = float(x)
    if not math.isfinite(x):
        raise FairAuditError(f"non-finite value {x!r} cannot be serialized")
    x = round(x, 6)
    return _Fixed(0.0 if x == 0 else x)


def _tally_dict(t: GroupTally) -> dict:
    d = {"n": t.n, "fav": t.fav}
    if t.has_predictions:
        d.update(tp=t.tp, fp=t.fp, tn=t.tn, fn=t.fn)
    return d


def to_dict(report: FairnessReport) -> dict:
    v = report.verdict
    audits = []
    for a in report.attribute_audits:
        audits.append(
            {
                "attribute": a.attribute,
                "bias_index": _fixed(a.bias_index),
                "unbiased": a.unbiased,
                "reduced_basis": a.reduced_basis,
                "metrics": [
                    {
                        "metric_id": mv.metric_id,
                        "value": _fixed(mv.value),
                        "ideal": _fixed(mv.ideal),
                        "deviation": _fixed(mv.deviation),
                        "in_band": v.metric_in_band[a.attribute][mv.metric_id],
                    }
                    for mv in a.metrics
                ],
                "group_counts": {
                    phase: {"privileged": _tally_dict(c.privileged), "unprivileged": _tally_dict(c.unprivileged)}
                    for phase, c in sorted(report.group_counts.get(a.attribute, {}).items())
                },
            }
        )
    return {
        "report_version": report.report_version,
        "config_digest": report.config_digest,
        "dataset_hash": report.dataset_hash,
        "dataset": _fix_numbers(report.dataset),
        "model": _fix_numbers(report.model),
        "training_data_available": report.training_data_available,
        "sop_trace": [{"step": s.step, "status": s.status, "title": s.title, "detail": s.detail} for s in report.sop_trace],
        "attribute_audits": audits,
        "fairness_score": _fixed(report.fairness_score),
        "verdict": {
            "fair": v.fair,
            "tolerance_band": _fixed(v.band.half_width),
            "bias_threshold": _fixed(v.bias_threshold),
            "fairness_threshold": _fixed(v.fairness_threshold),
            "attribute_unbiased": dict(v.attribute_unbiased),
            "out_of_band": [
                {"attribute": attr, "metric_id": mid, "value": _fixed(val)} for attr, mid, val in v.out_of_band
            ],
        },
        "limitations": list(report.limitations),
        "issued_at": report.issued_at,
        "valid_until": report.valid_until,
    }


def _fix_numbers(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _fixed(obj)
    if isinstance(obj, dict):
        return {k: _fix_numbers(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_fix_numbers(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, out: list[str], indent: int):
    pad = "  " * (indent + 1)
    if isinstance(obj, _Fixed):
        out.append(f"{obj:.6f}")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k, ensure_ascii=False) + ": ")
            _emit(v, out, indent + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append("  " * indent + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append("  " * indent + "]")
    elif isinstance(obj, float):
        # plain floats only come from parsed documents
        out.append(f"{_fixed(obj):.6f}")
    else:
        out.append(json.dumps(obj, ensure_ascii=False))


def to_json(report: FairnessReport) -> bytes:
    """Canonical JSON: sorted keys, two-space indent, numbers as 6-decimal fixed point.

    The report is checked for self-consistency (Bias Indexes and Fairness
    Score recomputed from its own metric values) before emitting.
    """
    report.check_consistency()
    out: list[str] = []
    _emit(to_dict(report), out, 0)
    out.append("\n")
    return "".join(out).encode("utf-8")


def _tally_from(d: dict) -> GroupTally:
    return GroupTally(d["n"], d["fav"], d.get("tp"), d.get("fp"), d.get("tn"), d.get("fn"))


def from_json(data: bytes | str) -> FairnessReport:
    """Rebuild a :class:`FairnessReport` from :func:`to_json` output."""
    doc = json.loads(data)
    if doc.get("report_version") != REPORT_VERSION:
        raise FairAuditError(f"unsupported report_version {doc.get('report_version')!r}")
    audits = []
    in_band = {}
    counts = {}
    for a in doc["attribute_audits"]:
        metrics = tuple(MetricValue(m["metric_id"], m["value"], m["ideal"]) for m in a["metrics"])
        audits.append(AttributeAudit(a["attribute"], metrics, a["bias_index"], a["unbiased"], a["reduced_basis"]))
        in_band[a["attribute"]] = {m["metric_id"]: m["in_band"] for m in a["metrics"]}
        counts[a["attribute"]] = {
            phase: GroupCounts(_tally_from(c["privileged"]), _tally_from(c["unprivileged"]))
            for phase, c in a["group_counts"].items()
        }
    vd = doc["verdict"]
    score = FairnessScoreResult(doc["fairness_score"], vd["fair"], tuple(audits))
    verdict = Verdict(
        band=ToleranceBand(vd["tolerance_band"]),
        bias_threshold=vd["bias_threshold"],
        fairness_threshold=vd["fairness_threshold"],
        metric_in_band=in_band,
        attribute_unbiased=vd["attribute_unbiased"],
        fairness_score=doc["fairness_score"],
        fair=vd["fair"],
        out_of_band=[(o["attribute"], o["metric_id"], o["value"]) for o in vd["out_of_band"]],
    )
    return FairnessReport(
        config_digest=doc["config_digest"],
        dataset_hash=doc["dataset_hash"],
        sop_trace=[SopStep(s["step"], s["status"], s["detail"]) for s in doc["sop_trace"]],
        score=score,
        verdict=verdict,
        limitations=list(doc["limitations"]),
        issued_at=doc["issued_at"],
        valid_until=doc["valid_until"],
        training_data_available=doc["training_data_available"],
        group_counts=counts,
        dataset=doc["dataset"],
        model=doc["model"],
        report_version=doc["report_version"],
    )


# ------------------------------------------------------------- certificate --


def render_certificate(report: FairnessReport) -> str:
    v = report.verdict
    heading = "CERTIFIED" if v.fair else "NOT CERTIFIED"
    lines = [
        f"# Fairness Certificate: {heading}",
        "",
        f"- Fairness Score: {report.fairness_score:.4f} (threshold {v.fairness_threshold:.2f})",
        f"- Verdict: {'fair' if v.fair else 'not fair'}",
        f"- Tolerance band: +/-{v.band.half_width:.2f} around each metric's ideal value",
        f"- Bias Index threshold: {v.bias_threshold:.2f}",
        f"- Issued: {report.issued_at}",
        f"- Valid until: {report.valid_until} (recertify before this date)",
        f"- Dataset SHA-256: {report.dataset_hash}",
        f"- Config digest: {report.config_digest}",
        "",
        "## Bias Index per protected attribute",
        "",
        "| Attribute | " + " | ".join(PHASE_METRICS["pre_training"] + PHASE_METRICS[POST_TRAINING]) + " | Bias Index | Unbiased |",
        "|---|" + "---|" * 7,
    ]
    for a in report.attribute_audits:
        cells = []
        for mid in PHASE_METRICS["pre_training"] + PHASE_METRICS[POST_TRAINING]:
            try:
                mv = a.metric(mid)
            except KeyError:
                cells.append("n/a")
                continue
            mark = "" if v.metric_in_band[a.attribute][mid] else " *"
            cells.append(f"{mv.value:.4f}{mark}")
        lines.append(
            f"| {a.attribute} | " + " | ".join(cells) + f" | {a.bias_index:.4f} | {'yes' if a.unbiased else 'no'} |"
        )
    lines += ["", "Values marked * fall outside the tolerance band.", ""]
    if v.out_of_band:
        lines += ["## Metrics outside the tolerance band", ""]
        for attr, mid, val in v.out_of_band:
            lines.append(f"- {attr}: {METRIC_NAMES[mid]} ({mid}) = {val:.4f}")
        lines.append("")
    lines += ["## Limitations", ""]
    if report.limitations:
        lines += [f"- {text}" for text in report.limitations]
    else:
        lines.append("- None recorded.")
    lines += ["", "## Procedure trace", ""]
    for s in report.sop_trace:
        lines.append(f"{s.step}. {s.title}: {s.status}" + (f" ({s.detail})" if s.detail else ""))
    return "\n".join(lines) + "\n"
