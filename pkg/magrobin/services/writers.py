"""
Result tables and their JSON / CSV serialization.

CSV files carry one header row, LF line endings and 12 significant digits.
Every header cell reads ``name[unit|provenance]``: the unit is ``1`` for
dimensionless numbers and ``-`` for text, the provenance is one of
``input`` (a run parameter), ``computed`` (a solver output), ``derived``
(a fixture or a value built from fixtures) or ``printed`` (a closed-form
statement evaluated as written). The module operation that produced each
column is kept in the table schema inside ``result.json``.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

SIGNIFICANT_DIGITS = 12

INPUT = "input"
COMPUTED = "computed"
DERIVED = "derived"
PRINTED = "printed"
PROVENANCE = (INPUT, COMPUTED, DERIVED, PRINTED)


@dataclass(frozen=True)
class Column:
    name: str
    unit: str = "1"
    source: str = ""
    provenance: str = COMPUTED

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {self.provenance!r} for column {self.name}")

    @property
    def header(self) -> str:
        return f"{self.name}[{self.unit}|{self.provenance}]"


@dataclass
class Table:
    """Named numeric table with per-column unit and provenance."""

    name: str
    columns: list[Column]
    rows: list[dict[str, Any]] = field(default_factory=list)

    @property
    def fieldnames(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def headers(self) -> list[str]:
        return [c.header for c in self.columns]

    def add(self, **values: Any) -> None:
        self.rows.append({name: values.get(name) for name in self.fieldnames})

    def extend(self, rows: Iterable[dict[str, Any]]) -> None:
        for row in rows:
            self.add(**row)

    def schema(self) -> dict[str, Any]:
        return {
            "file": f"{self.name}.csv",
            "columns": [{**c.__dict__, "header": c.header} for c in self.columns],
            "rows": len(self.rows),
        }


def table(
    name: str,
    source: str,
    *columns: tuple[str, ...] | str,
    inputs: Sequence[str] = (),
) -> Table:
    """
    Table of columns produced by ``source``.

    A column is a bare name, a ``(name, unit)`` pair or a
    ``(name, unit, provenance)`` triple. Names listed in ``inputs`` are
    tagged ``input``; everything else defaults to ``computed``.
    """
    cols = []
    for column in columns:
        spec = (column,) if isinstance(column, str) else tuple(column)
        label, unit = spec[0], spec[1] if len(spec) > 1 else "1"
        default = INPUT if label in inputs else COMPUTED
        provenance = spec[2] if len(spec) > 2 else default
        cols.append(Column(label, unit, source, provenance))
    return Table(name, cols)


def format_value(value: Any) -> str:
    """Cell text: floats with 12 significant digits, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return format(value, f".{SIGNIFICANT_DIGITS}g")
    return str(value)


def write_csv(path: Path, data: Table) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(data.headers)
        for row in data.rows:
            writer.writerow([format_value(row.get(k)) for k in data.fieldnames])
    return path


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return value


def write_json(path: Path, document: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(document), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def write_tables(directory: Path, tables: Sequence[Table]) -> list[Path]:
    return [write_csv(directory / f"{t.name}.csv", t) for t in tables]
