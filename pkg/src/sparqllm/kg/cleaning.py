"""Tabular cleanup before mapping: format normalization with per-cell error reporting."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Union

from ..errors import InputError


@dataclass
class RowSet:
    columns: list[str]
    rows: list[list[str]]

    def __post_init__(self):
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, expected {width}")

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise InputError(f"no such column: {name!r}") from None


def read_csv(source: Union[str, Path, io.TextIOBase]) -> RowSet:
    """Load a UTF-8 CSV with a header row into a RowSet."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    try:
        columns = next(reader)
    except StopIteration:
        return RowSet(columns=[], rows=[])
    rows = []
    for row in reader:
        if len(row) < len(columns):
            row = row + [""] * (len(columns) - len(row))
        rows.append(row[: len(columns)])
    return RowSet(columns=columns, rows=rows)


@dataclass(frozen=True)
class CleaningRule:
    column: str
    kind: str  # date | datetime | number | text
    day_first: bool = False
    decimal_comma: bool = False

    _KINDS = ("date", "datetime", "number", "text")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InputError(f"unknown cleaning rule kind {self.kind!r}")


@dataclass
class CellIssue:
    row: int
    column: str
    reason: str


@dataclass
class CleaningReport:
    issues: list[CellIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


_DATE_FORMATS_DAY_FIRST = ("%d/%m/%Y", "%d-%m-%Y", "%d.%m.%Y", "%Y-%m-%d", "%Y/%m/%d")
_DATE_FORMATS_MONTH_FIRST = ("%m/%d/%Y", "%m-%d-%Y", "%Y-%m-%d", "%Y/%m/%d")
_TIME_SUFFIXES = ("%H:%M:%S", "%H:%M")


def _parse_date(cell: str, day_first: bool) -> datetime:
    formats = _DATE_FORMATS_DAY_FIRST if day_first else _DATE_FORMATS_MONTH_FIRST
    for fmt in formats:
        try:
            return datetime.strptime(cell, fmt)
        except ValueError:
            continue
    raise ValueError(f"unrecognized date {cell!r}")


def _parse_datetime(cell: str, day_first: bool) -> datetime:
    for iso_fmt in ("%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"):
        try:
            return datetime.strptime(cell, iso_fmt)
        except ValueError:
            continue
    date_formats = _DATE_FORMATS_DAY_FIRST if day_first else _DATE_FORMATS_MONTH_FIRST
    for dfmt in date_formats:
        for tfmt in _TIME_SUFFIXES:
            try:
                return datetime.strptime(cell, f"{dfmt} {tfmt}")
            except ValueError:
                continue
    raise ValueError(f"unrecognized datetime {cell!r}")


_NUMBER_SHAPE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def _normalize_number(cell: str, decimal_comma: bool) -> str:
    text = cell.replace(" ", "").replace(" ", "")
    if decimal_comma:
        text = text.replace(".", "").replace(",", ".")
    else:
        text = text.replace(",", "")
    if not _NUMBER_SHAPE.match(text):
        raise ValueError(f"unparseable number {cell!r}")
    return text


def clean_rows(rows: RowSet, rules: Iterable[CleaningRule]) -> tuple[RowSet, CleaningReport]:
    """Normalize cells per rule; unparseable cells keep their trimmed value and are reported.

    All cells are whitespace-trimmed, typed rules additionally rewrite temporal
    cells to ISO-8601 and numeric cells to dot-decimal without grouping.  Row
    count is always preserved.
    """
    rules = list(rules)
    by_column: dict[int, CleaningRule] = {}
    for rule in rules:
        by_column[rows.column_index(rule.column)] = rule

    report = CleaningReport()
    cleaned_rows: list[list[str]] = []
    for r, row in enumerate(rows.rows):
        out = []
        for c, cell in enumerate(row):
            value = cell.strip()
            rule = by_column.get(c)
            if rule is not None and value:
                try:
                    if rule.kind == "date":
                        value = _parse_date(value, rule.day_first).date().isoformat()
                    elif rule.kind == "datetime":
                        value = _parse_datetime(value, rule.day_first).isoformat()
                    elif rule.kind == "number":
                        value = _normalize_number(value, rule.decimal_comma)
                except ValueError as exc:
                    report.issues.append(CellIssue(row=r, column=rule.column, reason=str(exc)))
            out.append(value)
        cleaned_rows.append(out)
    return RowSet(columns=list(rows.columns), rows=cleaned_rows), report


def load_cleaning_rules(doc: list[dict]) -> list[CleaningRule]:
    rules = []
    for entry in doc:
        rules.append(
            CleaningRule(
                column=entry["column"],
                kind=entry.get("kind", entry.get("type", "text")),
                day_first=bool(entry.get("day_first", False)),
                decimal_comma=bool(entry.get("decimal_comma", False)),
            )
        )
    return rules
