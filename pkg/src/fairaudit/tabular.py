"""Immutable column-oriented tables plus the load/clean/encode/split transforms.

Every transform returns a new :class:`Table`; column arrays are flagged
read-only so a table can be shared freely between readers.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from types import MappingProxyType
from typing import BinaryIO, Iterable, Mapping, Sequence

import numpy as np

from .errors import ColumnTypeError, ConfigError, DataError, ParseError, SchemaError

CATEGORICAL = "categorical"
NUMERIC = "numeric"
BOOLEAN = "boolean"
KINDS = (CATEGORICAL, NUMERIC, BOOLEAN)

DEFAULT_MISSING_TOKEN = "?"

_TRUE = {"true", "True", "TRUE"}
_FALSE = {"false", "False", "FALSE"}


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    missing_token: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"column {self.name!r}: unknown kind {self.kind!r}")


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    if values.flags.writeable:
        values = values.copy()
        values.flags.writeable = False
    return values


def _coerce(values, kind: str) -> np.ndarray:
    if kind == NUMERIC:
        return np.asarray(values, dtype=np.float64)
    if kind == BOOLEAN:
        return np.asarray(values, dtype=bool)
    arr = np.empty(len(values), dtype=object)
    arr[:] = [str(v) for v in values]
    return arr


class Table:
    """A named, typed collection of equal-length columns.

    ``dropped_rows``, ``missing_counts`` and ``source_rows`` record what
    :func:`load_csv` did to the raw file; derived tables keep them only
    when the row set is unchanged.
    """

    __slots__ = ("_schema", "_columns", "_row_count", "dropped_rows", "missing_counts", "source_rows")

    def __init__(
        self,
        schema: Sequence[ColumnSchema],
        columns: Mapping[str, np.ndarray],
        *,
        dropped_rows: int = 0,
        missing_counts: Mapping[str, int] | None = None,
        source_rows: np.ndarray | None = None,
    ):
        schema = tuple(schema)
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in schema: {names}")
        if set(names) != set(columns):
            raise SchemaError("schema names do not match the supplied columns")
        lengths = {len(columns[n]) for n in names}
        if len(lengths) > 1:
            raise SchemaError(f"columns have unequal lengths: {sorted(lengths)}")
        row_count = lengths.pop() if lengths else 0
        self._schema = schema
        self._columns = MappingProxyType({c.name: _freeze(_coerce(columns[c.name], c.kind)) for c in schema})
        self._row_count = row_count
        self.dropped_rows = dropped_rows
        self.missing_counts = MappingProxyType(dict(missing_counts or {}))
        self.source_rows = _freeze(np.arange(row_count) if source_rows is None else np.asarray(source_rows, dtype=np.int64))

    @classmethod
    def from_columns(cls, columns: Mapping[str, Sequence], kinds: Mapping[str, str] | None = None) -> "Table":
        """Build a table from plain sequences; kinds are inferred unless given."""
        kinds = dict(kinds or {})
        schema = []
        for name, values in columns.items():
            kind = kinds.get(name)
            if kind is None:
                arr = np.asarray(values)
                if arr.dtype == bool:
                    kind = BOOLEAN
                elif np.issubdtype(arr.dtype, np.number):
                    kind = NUMERIC
                else:
                    kind = CATEGORICAL
            schema.append(ColumnSchema(name, kind))
        return cls(schema, columns)

    @property
    def schema(self) -> tuple[ColumnSchema, ...]:
        return self._schema

    @property
    def columns(self) -> Mapping[str, np.ndarray]:
        return self._columns

    @property
    def names(self) -> list[str]:
        return [c.name for c in self._schema]

    @property
    def row_count(self) -> int:
        return self._row_count

    def __len__(self):
        return self._row_count

    def __contains__(self, name):
        return name in self._columns

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._columns[name]
        except KeyError:
            raise SchemaError(f"no column named {name!r}") from None

    def kind(self, name: str) -> str:
        for col in self._schema:
            if col.name == name:
                return col.kind
        raise SchemaError(f"no column named {name!r}")

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        if [(c.name, c.kind) for c in self._schema] != [(c.name, c.kind) for c in other._schema]:
            return False
        return self._row_count == other._row_count and all(
            np.array_equal(self._columns[n], other._columns[n]) for n in self.names
        )

    def __repr__(self):
        return f"Table({self._row_count} rows x {len(self._schema)} columns)"

    def _replace(self, schema, columns, keep_meta=True) -> "Table":
        if keep_meta:
            return Table(
                schema,
                columns,
                dropped_rows=self.dropped_rows,
                missing_counts=self.missing_counts,
                source_rows=self.source_rows,
            )
        return Table(schema, columns)

    def take(self, indices) -> "Table":
        """Rows at ``indices`` (duplicates allowed), in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        cols = {n: self._columns[n][indices] for n in self.names}
        return Table(self._schema, cols, source_rows=self.source_rows[indices])

    def select(self, names: Iterable[str]) -> "Table":
        names = list(names)
        by_name = {c.name: c for c in self._schema}
        unknown = [n for n in names if n not in by_name]
        if unknown:
            raise SchemaError(f"no column(s) named {unknown}")
        schema = [by_name[n] for n in names]
        return self._replace(schema, {n: self._columns[n] for n in names})

    def rows(self) -> Iterable[tuple]:
        cols = [self._columns[n] for n in self.names]
        for i in range(self._row_count):
            yield tuple(col[i] for col in cols)

    def to_csv(self) -> bytes:
        """Canonical CSV bytes: header row, ``\\n`` line endings, shortest float text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.names)
        formatters = [_FORMATTERS[c.kind] for c in self._schema]
        cols = [self._columns[n] for n in self.names]
        for i in range(self._row_count):
            writer.writerow([fmt(col[i]) for fmt, col in zip(formatters, cols)])
        return buf.getvalue().encode("utf-8")


def _format_number(value) -> str:
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


_FORMATTERS = {
    CATEGORICAL: str,
    NUMERIC: _format_number,
    BOOLEAN: lambda v: "true" if v else "false",
}


def _read_source(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        try:
            with open(source, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read {source}: {exc}") from exc
    else:
        data = source.read()
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc


def _infer_kind(values: list[str]) -> str:
    if values and all(v in _TRUE or v in _FALSE for v in values):
        return BOOLEAN
    try:
        for v in values:
            float(v)
    except ValueError:
        return CATEGORICAL
    return NUMERIC if values else CATEGORICAL


def load_csv(
    source: bytes | BinaryIO | str | os.PathLike,
    schema: Sequence[ColumnSchema] | None = None,
    *,
    missing_token: str = DEFAULT_MISSING_TOKEN,
    usecols: Sequence[str] | None = None,
) -> Table:
    """Parse a header-first, comma-delimited UTF-8 CSV into a :class:`Table`.

    Fields are whitespace-stripped. Any row holding the missing token in one
    of the used columns is dropped; the drop count, per-column missing
    counts and the surviving source row numbers are kept on the table.
    With ``schema=None`` each column is inferred as boolean, numeric or
    categorical from its non-missing values.
    """
    text = _read_source(source)
    reader = csv.reader(io.StringIO(text), skipinitialspace=True)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input: no header row") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise SchemaError(f"duplicate header names: {header}")

    used = list(header) if usecols is None else list(usecols)
    unknown = [c for c in used if c not in header]
    if unknown:
        raise SchemaError(f"columns not in header: {unknown}")

    if schema is not None:
        by_name = {c.name: c for c in schema}
        if len(by_name) != len(schema):
            raise SchemaError("duplicate names in schema")
        expected = set(header) if usecols is None else set(used)
        if set(by_name) != expected:
            missing_in_header = sorted(set(by_name) - set(header))
            not_in_schema = sorted(expected - set(by_name))
            raise SchemaError(
                f"header/schema mismatch (schema-only: {missing_in_header}, header-only: {not_in_schema})"
            )
    else:
        by_name = {}

    positions = [header.index(c) for c in used]
    tokens = [
        (by_name[c].missing_token if c in by_name and by_name[c].missing_token is not None else missing_token)
        for c in used
    ]

    raw_cols: list[list[str]] = [[] for _ in used]
    kept: list[int] = []
    missing_counts = dict.fromkeys(used, 0)
    seen = 0
    for row_no, row in enumerate(reader, start=1):
        if not row:
            # blank line: csv yields [], treat as absent rather than ragged
            continue
        seen += 1
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", row=row_no)
        fields = [row[p].strip() for p in positions]
        has_missing = False
        for name, value, token in zip(used, fields, tokens):
            if token is not None and value == token:
                missing_counts[name] += 1
                has_missing = True
        if has_missing:
            continue
        kept.append(row_no - 1)
        for bucket, value in zip(raw_cols, fields):
            bucket.append(value)

    column_schema = []
    columns = {}
    for name, values in zip(used, raw_cols):
        if name in by_name:
            col = ColumnSchema(name, by_name[name].kind, by_name[name].missing_token)
        else:
            col = ColumnSchema(name, _infer_kind(values))
        column_schema.append(col)
        columns[name] = _parse_column(values, col, kept)

    return Table(
        column_schema,
        columns,
        dropped_rows=seen - len(kept),
        missing_counts=missing_counts,
        source_rows=np.asarray(kept, dtype=np.int64),
    )


def _parse_column(values: list[str], col: ColumnSchema, kept: list[int]):
    if col.kind == NUMERIC:
        out = np.empty(len(values), dtype=np.float64)
        for i, v in enumerate(values):
            try:
                out[i] = float(v)
            except ValueError:
                raise ParseError(f"column {col.name!r}: {v!r} is not numeric", row=kept[i] + 1) from None
        return out
    if col.kind == BOOLEAN:
        out = np.empty(len(values), dtype=bool)
        for i, v in enumerate(values):
            if v in _TRUE or v == "1":
                out[i] = True
            elif v in _FALSE or v == "0":
                out[i] = False
            else:
                raise ParseError(f"column {col.name!r}: {v!r} is not boolean", row=kept[i] + 1)
        return out
    return values


def _require_columns(table: Table, names: Iterable[str]):
    unknown = [n for n in names if n not in table]
    if unknown:
        raise ConfigError(f"unknown column(s): {unknown}")


def clean(table: Table, drop_columns: Sequence[str] = (), strip_pattern: str = "") -> Table:
    """Drop columns and delete every character of ``strip_pattern`` from categorical cells."""
    _require_columns(table, drop_columns)
    keep = [c for c in table.schema if c.name not in set(drop_columns)]
    columns = {}
    delete = str.maketrans("", "", strip_pattern) if strip_pattern else None
    for col in keep:
        values = table[col.name]
        if delete is not None and col.kind == CATEGORICAL:
            values = [v.translate(delete) for v in values]
        columns[col.name] = values
    return table._replace(keep, columns)


def merge_classes(table: Table, column: str, mapping: Mapping[str, str]) -> Table:
    """Relabel values of a categorical column; unmapped values pass through."""
    _require_columns(table, [column])
    if table.kind(column) != CATEGORICAL:
        raise ColumnTypeError(f"column {column!r} is {table.kind(column)}, expected categorical")
    if not mapping:
        return table
    columns = dict(table.columns)
    columns[column] = [mapping.get(v, v) for v in table[column]]
    return table._replace(table.schema, columns)


def one_hot_encode(table: Table, columns: Sequence[str]) -> Table:
    """Replace each listed column by boolean indicator columns ``<col>=<value>``.

    Indicator columns appear where the source column was, ordered
    lexicographically by value.
    """
    _require_columns(table, columns)
    targets = set(columns)
    for name in columns:
        if table.kind(name) != CATEGORICAL:
            raise ColumnTypeError(f"column {name!r} is {table.kind(name)}, expected categorical")
    schema = []
    out = {}
    for col in table.schema:
        if col.name not in targets:
            schema.append(col)
            out[col.name] = table[col.name]
            continue
        values = table[col.name]
        for level in sorted(set(values)):
            name = f"{col.name}={level}"
            if name in table or name in out:
                raise SchemaError(f"one-hot column {name!r} collides with an existing column")
            schema.append(ColumnSchema(name, BOOLEAN))
            out[name] = values == level
    return table._replace(schema, out)


def split_indices(row_count: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded partition of ``range(row_count)`` into sorted train/test index arrays.

    The shuffle is a ``numpy.random.Generator`` backed by PCG64 seeded
    with ``seed``; the first ``round(train_fraction * row_count)`` shuffled
    positions form the training side.
    """
    if not (isinstance(train_fraction, (int, float)) and 0.0 < train_fraction < 1.0):
        raise ConfigError(f"train_fraction must lie in (0, 1), got {train_fraction!r}")
    if row_count < 2:
        raise DataError(f"cannot split a table with {row_count} row(s)")
    n_train = int(math.floor(train_fraction * row_count + 0.5))
    n_train = min(max(n_train, 1), row_count - 1)
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(row_count)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(table: Table, train_fraction: float, seed: int) -> tuple[Table, Table]:
    train_idx, test_idx = split_indices(table.row_count, train_fraction, seed)
    return table.take(train_idx), table.take(test_idx)
