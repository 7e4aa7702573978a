"""Command-line front end.

Exit codes: 0 success, 3 certification denied (``certify`` only), 4 config
error, 5 data error, 6 metric undefined.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .certification import load_config, render_certificate, run_certification, to_json, write_plots
from .certification.config import default_seed
from .certification.sop import prepare_dataset
from .errors import ConfigError, DataError, FairAuditError
from .metrics import disparate_impact, statistical_parity_difference
from .mitigation import MODES, MIXED, RebalanceStrategy, rebalance_indices
from .protection import binarize, group_counts
from .tabular import ColumnSchema, load_csv

EXIT_OK = 0
EXIT_DENIED = 3


def _err(message: str):
    print(message, file=sys.stderr)


def _write(path: str, data: bytes):
    out = Path(path)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)


def _run(args):
    config = load_config(args.config)
    return run_certification(config)


def cmd_audit(args) -> int:
    report = _run(args)
    _write(args.out, to_json(report))
    if args.plots:
        for path in write_plots(report, args.plots):
            _err(f"wrote {path}")
    _err(f"fairness score {report.fairness_score:.4f}: {'fair' if report.fair else 'not fair'}")
    return EXIT_OK


def cmd_certify(args) -> int:
    report = _run(args)
    _write(args.out, to_json(report))
    _write(args.certificate, render_certificate(report).encode("utf-8"))
    _err(f"fairness score {report.fairness_score:.4f}: {'CERTIFIED' if report.fair else 'NOT CERTIFIED'}")
    return EXIT_OK if report.fair else EXIT_DENIED


def _parity(table, spec, outcome) -> str:
    c = group_counts(binarize(table, spec), outcome.labels(table))
    return f"SPD {statistical_parity_difference(c).value:.4f}, DI {disparate_impact(c).value:.4f}"


def cmd_mitigate(args) -> int:
    config = load_config(args.config)
    spec = config.attribute(args.attribute)
    seed = args.seed if args.seed is not None else default_seed()
    strategy = RebalanceStrategy(mode=args.strategy, seed=seed)
    prepared = prepare_dataset(config)
    idx = rebalance_indices(prepared.cleaned, spec, config.outcome, strategy)
    print(f"{spec.display_name} before: {_parity(prepared.cleaned, spec, config.outcome)}")
    if len(idx) == prepared.cleaned.row_count and np.array_equal(idx, np.arange(len(idx))):
        _err(f"{spec.display_name} is already balanced within tolerance; output is a copy of the input")
        _write(args.out, Path(config.dataset.path).read_bytes())
        print(f"{spec.display_name} after: {_parity(prepared.cleaned, spec, config.outcome)}")
        return EXIT_OK
    print(f"{spec.display_name} after: {_parity(prepared.cleaned.take(idx), spec, config.outcome)}")
    # clean/merge are per-cell, so row indices carry over to the loaded rows
    _write(args.out, prepared.loaded.take(idx).to_csv())
    _err(f"wrote {len(idx)} rows to {args.out}")
    return EXIT_OK


def _load_schema(path: str):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read schema {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("schema file must map column names to kinds")
    return [ColumnSchema(name, kind) for name, kind in doc.items()]


def cmd_inspect(args) -> int:
    schema = _load_schema(args.schema) if args.schema else None
    if not Path(args.data).is_file():
        raise DataError(f"cannot read {args.data}")
    table = load_csv(args.data, schema, missing_token=args.missing_token)
    print(f"rows: {table.row_count} kept, {table.dropped_rows} dropped for missing values")
    width = max([len(n) for n in table.names] + [6])
    print(f"{'column':<{width}}  {'kind':<11}  {'distinct':>8}  {'missing':>7}")
    for col in table.schema:
        distinct = len(np.unique(table[col.name]))
        print(f"{col.name:<{width}}  {col.kind:<11}  {distinct:>8}  {table.missing_counts.get(col.name, 0):>7}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairaudit", description="Group-fairness audit and certification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="measure fairness and write the report (never gates)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--plots", help="directory for one SVG per attribute")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("certify", help="audit, write report and certificate; exit 3 when denied")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--certificate", required=True, help="certificate Markdown path")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("mitigate", help="rebalance favorable rates for one attribute")
    p.add_argument("--config", required=True)
    p.add_argument("--attribute", required=True, help="display name or column of a protected attribute")
    p.add_argument("--strategy", choices=MODES, default=MIXED)
    p.add_argument("--seed", type=int, help="defaults to $FAIRAUDIT_SEED, then 0")
    p.add_argument("--out", required=True, help="rebalanced CSV path")
    p.set_defaults(func=cmd_mitigate)

    p = sub.add_parser("inspect", help="summarize the columns of a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", help="JSON object mapping column names to kinds")
    p.add_argument("--missing-token", default="?")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FairAuditError as exc:
        _err(f"error: {exc}")
        trace = getattr(exc, "sop_trace", None)
        if trace:
            failed = [s.step for s in trace if s.status == "failed"]
            if failed:
                _err(f"procedure aborted at step {failed[0]}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
