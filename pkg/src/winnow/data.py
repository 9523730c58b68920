"""Tabular data model: typed columns, CSV ingestion, row distances.

Column roles are declared in the CSV header itself:

* a trailing ``+`` marks an objective column to maximize,
* a trailing ``-`` marks an objective column to minimize,
* a leading ``?`` marks a column that is carried along but ignored,
* anything else is a decision column, numeric if every known cell parses
  as a finite number, symbolic otherwise.

Cells that are empty or ``?`` are missing. Missing is a real state: it is
never conflated with ``0`` or ``""``, and it is treated pessimistically by
the distance function (assume the worst disagreement).

Distances are computed over decision columns only, on min-max normalized
values, so that clustering never needs the objective columns. Objective
quality is summarized by :func:`d2h`, the normalized Euclidean distance of
a row's objectives from their ideal values (lower is better).

Leading lines starting with ``#`` are skipped on ingestion, so artifacts
that carry a reproducibility header re-parse cleanly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import IO, Sequence

import numpy as np

__all__ = [
    "Cell",
    "ColumnSpec",
    "ConfigError",
    "Dataset",
    "EvaluationError",
    "Goal",
    "IngestionError",
    "Role",
    "Row",
    "d2h",
    "dist",
    "dist_to_many",
    "norm",
    "parse_csv",
    "to_csv",
]

# A cell is a finite float, a symbolic token, or None for missing.
Cell = float | str | None

MISSING_TOKENS = ("", "?")


class IngestionError(ValueError):
    """A CSV (or programmatic table) cannot be turned into a Dataset."""


class EvaluationError(ValueError):
    """A row cannot be scored, e.g. an objective cell is missing."""


class ConfigError(ValueError):
    """The dataset cannot support the requested operation."""


class Role(Enum):
    NUMERIC = "numeric"      # numeric decision
    SYMBOLIC = "symbolic"    # symbolic decision
    OBJECTIVE = "objective"  # numeric, scored by d2h, excluded from dist
    IGNORED = "ignored"      # carried along, plays no role anywhere

    @property
    def is_decision(self) -> bool:
        return self in (Role.NUMERIC, Role.SYMBOLIC)


class Goal(Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


@dataclass
class ColumnSpec:
    """One column: name (as written in the header, markers included), role,
    optimization goal for objectives, and the observed numeric bounds."""

    name: str
    role: Role
    goal: Goal | None = None
    lo: float | None = None
    hi: float | None = None


@dataclass(slots=True)
class Row:
    """One record: a stable integer id plus one cell per column."""

    id: int
    cells: list


def _as_number(token: str) -> float | None:
    """Parse a finite number, else None. NaN/inf tokens are not numbers
    here because cells must stay finite."""
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


class Dataset:
    """An immutable table plus the caches the rest of the toolkit leans on.

    All derived state (bounds, normalized decision matrices, symbol codes)
    is built eagerly in the constructor; afterwards every operation is
    read-only and safe to share across threads.
    """

    def __init__(self, columns: Sequence[ColumnSpec], rows: Sequence[Row]):
        self.columns: list[ColumnSpec] = list(columns)
        self.rows: list[Row] = list(rows)
        self._validate()
        self._update_bounds()
        self._build_caches()

    # -- construction ------------------------------------------------------

    def _validate(self) -> None:
        ncols = len(self.columns)
        seen: set[int] = set()
        for row in self.rows:
            if len(row.cells) != ncols:
                raise IngestionError(
                    f"row id {row.id}: expected {ncols} cells, got {len(row.cells)}"
                )
            if row.id in seen:
                raise IngestionError(f"duplicate row id {row.id}")
            seen.add(row.id)
        for j, col in enumerate(self.columns):
            if col.role in (Role.NUMERIC, Role.OBJECTIVE):
                for row in self.rows:
                    v = row.cells[j]
                    if v is None:
                        continue
                    if not isinstance(v, (int, float)) or not math.isfinite(v):
                        raise IngestionError(
                            f"column {col.name!r} is numeric but row id {row.id} "
                            f"holds {v!r}"
                        )

    def _update_bounds(self) -> None:
        for j, col in enumerate(self.columns):
            if col.role not in (Role.NUMERIC, Role.OBJECTIVE):
                continue
            vals = [row.cells[j] for row in self.rows if row.cells[j] is not None]
            if vals:
                col.lo = float(min(vals))
                col.hi = float(max(vals))

    def _build_caches(self) -> None:
        self._pos = {row.id: i for i, row in enumerate(self.rows)}
        self._col_index = {c.name: j for j, c in enumerate(self.columns)}
        self._num_idx = [j for j, c in enumerate(self.columns) if c.role is Role.NUMERIC]
        self._sym_idx = [j for j, c in enumerate(self.columns) if c.role is Role.SYMBOLIC]
        self._obj_idx = [j for j, c in enumerate(self.columns) if c.role is Role.OBJECTIVE]
        n = len(self.rows)

        self._sym_codes: list[dict[str, int]] = []
        for j in self._sym_idx:
            codes: dict[str, int] = {}
            for row in self.rows:
                v = row.cells[j]
                if v is not None and v not in codes:
                    codes[v] = len(codes)
            self._sym_codes.append(codes)

        self._num = np.full((n, len(self._num_idx)), np.nan)
        for k, j in enumerate(self._num_idx):
            col = self.columns[j]
            for i, row in enumerate(self.rows):
                v = row.cells[j]
                if v is not None:
                    self._num[i, k] = norm(col, v)

        self._sym = np.full((n, len(self._sym_idx)), -1, dtype=np.int32)
        for k, j in enumerate(self._sym_idx):
            codes = self._sym_codes[k]
            for i, row in enumerate(self.rows):
                v = row.cells[j]
                if v is not None:
                    self._sym[i, k] = codes[v]

    # -- accessors ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, row_id: int) -> Row:
        return self.rows[self._pos[row_id]]

    def column_index(self, name: str) -> int:
        return self._col_index[name]

    @property
    def decision_columns(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.role.is_decision]

    @property
    def objective_columns(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.role is Role.OBJECTIVE]

    def _vectors(self, row: Row) -> tuple[np.ndarray, np.ndarray]:
        """Normalized numeric values and symbol codes for one row; served
        from the cache when the row belongs to this dataset."""
        i = self._pos.get(row.id)
        if i is not None and self.rows[i] is row:
            return self._num[i], self._sym[i]
        num = np.full(len(self._num_idx), np.nan)
        for k, j in enumerate(self._num_idx):
            v = row.cells[j]
            if v is not None:
                num[k] = norm(self.columns[j], v)
        sym = np.full(len(self._sym_idx), -1, dtype=np.int32)
        for k, j in enumerate(self._sym_idx):
            v = row.cells[j]
            if v is not None:
                sym[k] = self._sym_codes[k].get(v, -2)  # -2: token never seen here
        return num, sym

    def _matrix(self, rows: Sequence[Row]) -> tuple[np.ndarray, np.ndarray]:
        idx = [self._pos.get(r.id) for r in rows]
        if all(i is not None and self.rows[i] is r for i, r in zip(idx, rows)):
            sel = np.asarray(idx, dtype=np.intp)
            return self._num[sel], self._sym[sel]
        nums, syms = zip(*(self._vectors(r) for r in rows))
        return np.stack(nums), np.stack(syms)


def norm(col: ColumnSpec, v: float) -> float:
    """Min-max normalize v into [0, 1] against the column's observed bounds.

    Degenerate columns (hi == lo) normalize to 0.5 so they contribute
    nothing to differences; values outside the observed bounds clamp.
    """
    if col.lo is None or col.hi is None:
        raise ConfigError(f"column {col.name!r} has no observed numeric bounds")
    if col.hi == col.lo:
        return 0.5
    x = (v - col.lo) / (col.hi - col.lo)
    return min(1.0, max(0.0, x))


def dist_to_many(row: Row, others: Sequence[Row], ds: Dataset, p: float = 2.0) -> np.ndarray:
    """Distances from one row to many, in [0, 1] each.

    Per decision column: numeric -> |norm(a) - norm(b)|; symbolic -> 0/1 on
    equality; one side missing -> the worst case for the known value
    (numeric max(v, 1 - v), symbolic 1); both missing -> 1. Aggregated as
    (mean of per-column differences**p)**(1/p).
    """
    k = len(ds._num_idx) + len(ds._sym_idx)
    if k == 0:
        raise ConfigError("no decision columns")
    a_num, a_sym = ds._vectors(row)
    b_num, b_sym = ds._matrix(others)

    acc = np.zeros(len(others))
    if len(ds._num_idx):
        d = np.abs(b_num - a_num)
        a_nan = np.isnan(a_num)
        b_nan = np.isnan(b_num)
        only_b = ~a_nan & b_nan
        if only_b.any():
            worst_a = np.maximum(a_num, 1.0 - a_num)
            d = np.where(only_b, worst_a, d)
        only_a = a_nan & ~b_nan
        if only_a.any():
            worst_b = np.maximum(b_num, 1.0 - b_num)
            d = np.where(only_a, worst_b, d)
        d = np.where(a_nan & b_nan, 1.0, d)
        acc += (d**p).sum(axis=1)
    if len(ds._sym_idx):
        d = (b_sym != a_sym) | (b_sym < 0) | (a_sym < 0)
        acc += d.astype(float).sum(axis=1)  # 0/1 differences, any power is itself
    return (acc / k) ** (1.0 / p)


def dist(r1: Row, r2: Row, ds: Dataset, p: float = 2.0) -> float:
    """Distance between two rows in [0, 1]; see dist_to_many."""
    return float(dist_to_many(r1, [r2], ds, p)[0])


def d2h(row: Row, ds: Dataset) -> float:
    """Distance to heaven: how far the row's normalized objectives sit from
    their ideals (1 for maximize, 0 for minimize). Lower is better."""
    if not ds._obj_idx:
        raise ConfigError("no objective columns")
    total = 0.0
    for j in ds._obj_idx:
        col = ds.columns[j]
        v = row.cells[j]
        if v is None:
            raise EvaluationError(
                f"row id {row.id}: objective {col.name!r} is missing, cannot score"
            )
        h = 1.0 if col.goal is Goal.MAXIMIZE else 0.0
        total += (norm(col, v) - h) ** 2
    return math.sqrt(total / len(ds._obj_idx))


# -- CSV -------------------------------------------------------------------


def _column_from_header(name: str) -> ColumnSpec:
    if name.startswith("?"):
        return ColumnSpec(name, Role.IGNORED)
    if name.endswith("+"):
        return ColumnSpec(name, Role.OBJECTIVE, Goal.MAXIMIZE)
    if name.endswith("-"):
        return ColumnSpec(name, Role.OBJECTIVE, Goal.MINIMIZE)
    return ColumnSpec(name, Role.NUMERIC)  # numeric vs symbolic fixed after scan


def parse_csv(src: "str | IO[str]") -> Dataset:
    """Ingest a header-first CSV (RFC-4180 quoting) into a Dataset.

    Raises IngestionError for ragged rows (naming the offending line) and
    for objective columns holding non-numeric, non-missing cells.
    """
    stream = io.StringIO(src) if isinstance(src, str) else src
    reader = csv.reader(stream)

    header: list[str] | None = None
    records: list[tuple[int, list[str]]] = []
    for fields in reader:
        if header is None:
            if not fields:
                continue
            if fields[0].startswith("#"):
                continue  # reproducibility header from an artifact
            header = fields
            continue
        if not fields:
            continue
        if len(fields) != len(header):
            raise IngestionError(
                f"line {reader.line_num}: expected {len(header)} fields, "
                f"got {len(fields)}"
            )
        records.append((reader.line_num, fields))
    if header is None:
        raise IngestionError("empty input: no header row")

    columns = [_column_from_header(name) for name in header]

    # Decide numeric vs symbolic per decision column: numeric iff every
    # non-missing cell parses as a finite number.
    for j, col in enumerate(columns):
        if col.role is not Role.NUMERIC:
            continue
        for _, fields in records:
            token = fields[j]
            if token.strip() in MISSING_TOKENS:
                continue
            if _as_number(token) is None:
                col.role = Role.SYMBOLIC
                break

    rows: list[Row] = []
    for i, (line_num, fields) in enumerate(records):
        cells: list = []
        for j, col in enumerate(columns):
            token = fields[j]
            if token.strip() in MISSING_TOKENS:
                cells.append(None)
                continue
            if col.role is Role.OBJECTIVE:
                v = _as_number(token)
                if v is None:
                    raise IngestionError(
                        f"line {line_num}: objective column {col.name!r} "
                        f"holds non-numeric cell {token!r}"
                    )
                cells.append(v)
            elif col.role is Role.NUMERIC:
                cells.append(_as_number(token))
            else:
                cells.append(token)
        rows.append(Row(i, cells))

    return Dataset(columns, rows)


def _format_cell(v) -> str:
    if v is None:
        return "?"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(ds: Dataset) -> str:
    """Serialize back to the on-disk CSV convention (missing cells as ?)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([c.name for c in ds.columns])
    for row in ds.rows:
        writer.writerow([_format_cell(v) for v in row.cells])
    return buf.getvalue()
