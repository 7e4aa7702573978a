"""Rebuild data/adult.csv and data/german.csv from the raw UCI files.

The raw files are the original UCI distributions (adult.data, adult.test,
german.data). Pass the directory holding them:

    python scripts/build_datasets.py /path/to/raw data/
"""

import csv
import sys
from pathlib import Path

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]

GERMAN_COLUMNS = [
    "status", "duration", "credit_history", "purpose", "credit_amount",
    "savings", "employment", "installment_rate", "personal_status",
    "other_debtors", "residence_since", "property", "age", "other_plans",
    "housing", "existing_credits", "job", "num_dependents", "telephone",
    "foreign_worker",
]

# personal_status codes A91..A95 (see german.doc)
GERMAN_SEX = {"A91": "male", "A92": "female", "A93": "male", "A94": "male", "A95": "female"}


def build_adult(raw: Path, out: Path) -> int:
    rows = []
    for name in ("adult.data", "adult.test"):
        for line in (raw / name).read_text().splitlines():
            if not line.strip() or line.startswith("|"):
                continue
            rows.append([field.strip() for field in line.split(",")])
    with open(out / "adult.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ADULT_COLUMNS)
        writer.writerows(rows)
    return len(rows)


def build_german(raw: Path, out: Path) -> int:
    rows = []
    for line in (raw / "german.data").read_text().splitlines():
        fields = line.split()
        if not fields:
            continue
        *features, label = fields
        rows.append(features + [GERMAN_SEX[features[8]], "good" if label == "1" else "bad"])
    with open(out / "german.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GERMAN_COLUMNS + ["sex", "risk"])
        writer.writerows(rows)
    return len(rows)


if __name__ == "__main__":
    raw_dir, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)
    print("adult rows:", build_adult(raw_dir, out_dir))
    print("german rows:", build_german(raw_dir, out_dir))
