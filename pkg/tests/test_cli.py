import json

import numpy as np
import pytest

from fairaudit.cli import main
from fairaudit.synthetic import make_synthetic, synthetic_config, write_synthetic
from fairaudit.tabular import Table, load_csv

from .conftest import CONFIGS


@pytest.fixture
def synth(tmp_path):
    _, config = write_synthetic(tmp_path, n=600, seed=1, n_trees=5, max_depth=5)
    return tmp_path, config


def test_audit_writes_report(synth):
    tmp, config = synth
    out = tmp / "out" / "report.json"
    assert main(["audit", "--config", str(config), "--out", str(out), "--plots", str(tmp / "plots")]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["sop_trace"]) == 12
    assert (tmp / "plots" / "Group.svg").exists()


def test_certify_exit_codes(tmp_path):
    _, fair_cfg = write_synthetic(tmp_path / "fair", n=3000, seed=0, gap=0.0, n_trees=5, max_depth=5)
    _, unfair_cfg = write_synthetic(tmp_path / "unfair", n=3000, seed=0, gap=0.5, n_trees=5, max_depth=5)
    args = lambda d, c: ["certify", "--config", str(c), "--out", str(d / "r.json"), "--certificate", str(d / "c.md")]
    assert main(args(tmp_path / "fair", fair_cfg)) == 0
    assert main(args(tmp_path / "unfair", unfair_cfg)) == 3
    assert (tmp_path / "unfair" / "c.md").read_text().startswith("# Fairness Certificate: NOT CERTIFIED")


def test_audit_never_gates(tmp_path):
    _, cfg = write_synthetic(tmp_path, n=2000, seed=0, gap=0.5, n_trees=3, max_depth=4)
    assert main(["audit", "--config", str(cfg), "--out", str(tmp_path / "r.json")]) == 0


def test_missing_config_exit_4(tmp_path, capsys):
    assert main(["audit", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "r.json")]) == 4
    assert "error:" in capsys.readouterr().err


def test_undefined_ratio_exit_6(tmp_path, capsys):
    t = make_synthetic(300, 0)
    cols = {n: t[n] for n in t.names}
    cols["label"] = np.where(t["group"] == "A", "no", t["label"]).astype(object)
    (tmp_path / "data.csv").write_bytes(Table.from_columns(cols).to_csv())
    (tmp_path / "config.json").write_text(json.dumps(synthetic_config("data.csv")))
    code = main(["audit", "--config", str(tmp_path / "config.json"), "--out", str(tmp_path / "r.json")])
    assert code == 6
    err = capsys.readouterr().err
    assert "DI" in err and "step 4" in err


def test_ragged_csv_exit_5(tmp_path, capsys):
    (tmp_path / "data.csv").write_text("group,label\nA,yes\nB\n")
    (tmp_path / "config.json").write_text(json.dumps(synthetic_config("data.csv")))
    assert main(["audit", "--config", str(tmp_path / "config.json"), "--out", str(tmp_path / "r.json")]) == 5
    assert "row 2" in capsys.readouterr().err


def test_mitigate_balances(tmp_path, capsys):
    _, cfg = write_synthetic(tmp_path, n=2000, seed=0, gap=0.3)
    out = tmp_path / "balanced.csv"
    assert main(["mitigate", "--config", str(cfg), "--attribute", "Group", "--out", str(out)]) == 0
    t = load_csv(out)
    yes = t["label"] == "yes"
    assert abs(yes[t["group"] == "A"].mean() - yes[t["group"] == "B"].mean()) <= 0.005
    assert "after: SPD" in capsys.readouterr().out


def test_mitigate_noop_copies_input(tmp_path, capsys):
    # equal favorable rates (30/100 in each group), written with non-canonical spacing
    rows = [f"{g}, {'yes' if i < 30 else 'no'}, {i}" for g in "AB" for i in range(100)]
    data = tmp_path / "data.csv"
    data.write_text("group,label,x\n" + "\n".join(rows) + "\n")
    doc = synthetic_config("data.csv")
    doc["model"]["n_trees"] = 1
    (tmp_path / "config.json").write_text(json.dumps(doc))
    out = tmp_path / "copy.csv"
    assert main(["mitigate", "--config", str(tmp_path / "config.json"), "--attribute", "group", "--out", str(out)]) == 0
    assert out.read_bytes() == data.read_bytes()
    assert "already balanced" in capsys.readouterr().err


def test_mitigate_seed_from_environment(tmp_path, monkeypatch):
    _, cfg = write_synthetic(tmp_path, n=2000, seed=0, gap=0.3)
    run = lambda name: (main(["mitigate", "--config", str(cfg), "--attribute", "Group", "--out", str(tmp_path / name)]), (tmp_path / name).read_bytes())[1]
    monkeypatch.setenv("FAIRAUDIT_SEED", "5")
    a = run("a.csv")
    b = run("b.csv")
    monkeypatch.setenv("FAIRAUDIT_SEED", "6")
    c = run("c.csv")
    assert a == b != c


def test_mitigate_unknown_attribute(synth):
    tmp, config = synth
    assert main(["mitigate", "--config", str(config), "--attribute", "Age", "--out", str(tmp / "x.csv")]) == 4


def test_inspect(capsys):
    assert main(["inspect", "--data", str(CONFIGS.parent / "data" / "german.csv")]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "rows: 1000 kept, 0 dropped for missing values"
    assert "credit_amount" in out and "numeric" in out


def test_inspect_missing_file(tmp_path):
    assert main(["inspect", "--data", str(tmp_path / "none.csv")]) == 5
