"""Result visualization planning: column summaries, plot-vs-table decision,
declarative chart specs with validation and an LLM-assisted repair loop.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import InputError, SparqllmError
from .generation import LlmGateway
from .kg.results import SparqlResultSet
from .kg.terms import Literal, NUMERIC_DATATYPES, TEMPORAL_DATATYPES

logger = logging.getLogger(__name__)

PLOT = "PLOT"
TABLE = "TABLE"

_ENUMERATION_OPENERS = ("list", "show all", "enumerate")
_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?)?$")
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")

MIN_PLOT_ROWS = 3
PIE_MAX_CATEGORIES = 8
BOX_MIN_ROWS_PER_GROUP = 3


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    TEMPORAL = "temporal"


@dataclass
class ColumnSummary:
    name: str
    kind: ColumnKind
    count: int
    distinct: int
    min: Optional[float] = None
    max: Optional[float] = None
    mean: Optional[float] = None
    stddev: Optional[float] = None  # population

    def to_json(self) -> dict:
        doc = {"name": self.name, "kind": self.kind.value,
               "count": self.count, "distinct": self.distinct}
        if self.kind is ColumnKind.NUMERIC and self.count:
            doc.update(min=self.min, max=self.max, mean=self.mean, stddev=self.stddev)
        return doc


@dataclass
class DataSummary:
    row_count: int
    columns: list[ColumnSummary] = field(default_factory=list)

    def column(self, name: str) -> ColumnSummary:
        for col in self.columns:
            if col.name == name:
                return col
        raise InputError(f"no such column in summary: {name!r}")

    def kinds(self) -> dict[str, ColumnKind]:
        return {c.name: c.kind for c in self.columns}

    def to_json(self) -> dict:
        return {"row_count": self.row_count, "columns": [c.to_json() for c in self.columns]}

    @classmethod
    def from_json(cls, doc: dict) -> "DataSummary":
        cols = [
            ColumnSummary(
                name=c["name"], kind=ColumnKind(c["kind"]), count=c.get("count", 0),
                distinct=c.get("distinct", 0), min=c.get("min"), max=c.get("max"),
                mean=c.get("mean"), stddev=c.get("stddev"),
            )
            for c in doc.get("columns", [])
        ]
        return cls(row_count=doc.get("row_count", 0), columns=cols)


def _cell_kind(cell) -> ColumnKind:
    if isinstance(cell, Literal):
        if cell.datatype in NUMERIC_DATATYPES:
            return ColumnKind.NUMERIC
        if cell.datatype in TEMPORAL_DATATYPES or _ISO_DATE.match(cell.lexical.strip()):
            return ColumnKind.TEMPORAL
        if _NUMBER.match(cell.lexical.strip()):
            return ColumnKind.NUMERIC
        return ColumnKind.CATEGORICAL
    return ColumnKind.CATEGORICAL  # IRIs


def summarize_results(rs: SparqlResultSet) -> DataSummary:
    """Per-column kind inference plus descriptive statistics over bound cells."""
    columns = []
    for name in rs.variables:
        cells = [c for c in rs.column(name) if c is not None]
        count = len(cells)
        distinct = len({_distinct_key(c) for c in cells})
        if count and all(_cell_kind(c) is ColumnKind.NUMERIC for c in cells):
            values = [float(c.lexical) for c in cells]
            mean = sum(values) / count
            variance = sum((v - mean) ** 2 for v in values) / count
            columns.append(ColumnSummary(
                name=name, kind=ColumnKind.NUMERIC, count=count, distinct=distinct,
                min=min(values), max=max(values), mean=mean, stddev=math.sqrt(variance),
            ))
            continue
        if count and all(_cell_kind(c) is ColumnKind.TEMPORAL for c in cells):
            kind = ColumnKind.TEMPORAL
        else:
            kind = ColumnKind.CATEGORICAL
        columns.append(ColumnSummary(name=name, kind=kind, count=count, distinct=distinct))
    return DataSummary(row_count=rs.row_count, columns=columns)


def _distinct_key(cell) -> tuple:
    if isinstance(cell, Literal):
        return ("lit", cell.lexical, cell.datatype)
    return ("iri", cell)


# ---------------------------------------------------------------------------
# Chart specs

class ChartKind(str, Enum):
    BAR = "bar"
    LINE = "line"
    SCATTER = "scatter"
    VIOLIN = "violin"
    BOX = "box"
    PIE = "pie"
    TABLE = "table"


@dataclass
class ChartSpec:
    kind: ChartKind
    x: Optional[str] = None
    y: list[str] = field(default_factory=list)
    title: str = ""
    x_label: str = ""
    y_label: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "x": self.x, "y": list(self.y),
                "title": self.title, "x_label": self.x_label, "y_label": self.y_label}

    @classmethod
    def from_json(cls, doc: dict) -> "ChartSpec":
        try:
            kind = ChartKind(str(doc["kind"]).lower())
        except (KeyError, ValueError):
            raise InputError(f"unknown chart kind {doc.get('kind')!r}") from None
        y = doc.get("y") or []
        if isinstance(y, str):
            y = [y]
        return cls(kind=kind, x=doc.get("x") or None, y=list(y),
                   title=doc.get("title", "") or "", x_label=doc.get("x_label", "") or "",
                   y_label=doc.get("y_label", "") or "")


class ChartSpecError(InputError):
    pass


def validate_chart_spec(spec: ChartSpec, summary: DataSummary) -> None:
    """Check a spec against the result schema; raises ChartSpecError with the defect."""
    kinds = summary.kinds()

    def require_column(name: Optional[str], role: str) -> str:
        if not name:
            raise ChartSpecError(f"{spec.kind.value} chart needs an {role} column")
        if name not in kinds:
            raise ChartSpecError(f"{role} column {name!r} does not exist in the result")
        return name

    if spec.kind is ChartKind.TABLE:
        if spec.x or spec.y:
            raise ChartSpecError("table spec must not set x or y encodings")
        return

    require_column(spec.x, "x")
    if not spec.y:
        raise ChartSpecError(f"{spec.kind.value} chart needs at least one y column")
    for name in spec.y:
        require_column(name, "y")

    if spec.kind in (ChartKind.LINE, ChartKind.SCATTER):
        if kinds[spec.x] not in (ColumnKind.NUMERIC, ColumnKind.TEMPORAL):
            raise ChartSpecError(f"{spec.kind.value} x column must be numeric or temporal")
        for name in spec.y:
            if kinds[name] is not ColumnKind.NUMERIC:
                raise ChartSpecError(f"{spec.kind.value} y column {name!r} must be numeric")
    elif spec.kind is ChartKind.PIE:
        if len(spec.y) != 1:
            raise ChartSpecError("pie chart needs exactly one value column")
        if kinds[spec.x] is not ColumnKind.CATEGORICAL:
            raise ChartSpecError("pie chart x column must be categorical")
        if kinds[spec.y[0]] is not ColumnKind.NUMERIC:
            raise ChartSpecError("pie chart value column must be numeric")
    else:  # BAR, VIOLIN, BOX share encoding rules
        for name in spec.y:
            if kinds[name] is not ColumnKind.NUMERIC:
                raise ChartSpecError(f"{spec.kind.value} y column {name!r} must be numeric")


# ---------------------------------------------------------------------------
# Representation decision

def _is_enumeration_question(question: str) -> bool:
    q = question.strip().lower()
    return any(q.startswith(op) for op in _ENUMERATION_OPENERS)


def _heuristic_representation(question: str, summary: DataSummary) -> str:
    has_numeric = any(c.kind is ColumnKind.NUMERIC for c in summary.columns)
    if has_numeric and summary.row_count >= MIN_PLOT_ROWS and not _is_enumeration_question(question):
        return PLOT
    return TABLE


_DECISION_PROMPT = (
    "Decide how to present a query result to the user.\n"
    "Question: {question}\n"
    "SPARQL query:\n{query}\n"
    "Result summary: {summary}\n"
    'Answer with exactly one word: "plot" or "table".'
)


def decide_representation(question: str, query: str, summary: DataSummary,
                          gateway: Optional[LlmGateway] = None) -> str:
    """PLOT or TABLE; LLM answers a two-choice prompt, heuristic otherwise."""
    if gateway is None:
        return _heuristic_representation(question, summary)
    prompt = _DECISION_PROMPT.format(question=question, query=query,
                                     summary=json.dumps(summary.to_json(), sort_keys=True))
    for attempt in range(2):  # one re-ask on an unparseable answer
        try:
            answer = gateway.complete(prompt).strip().strip('."\'' ).lower()
        except SparqllmError as exc:
            logger.warning("decision gateway failed (%s); falling back to heuristic", exc)
            return _heuristic_representation(question, summary)
        if answer in ("plot", "table"):
            return PLOT if answer == "plot" else TABLE
        prompt += '\nYour previous answer was not one of "plot"/"table". Answer with one word.'
    logger.warning("decision gateway returned no usable answer; falling back to heuristic")
    return _heuristic_representation(question, summary)


# ---------------------------------------------------------------------------
# Chart planning

class PlanningError(SparqllmError):
    pass


def _heuristic_chart(question: str, summary: DataSummary) -> ChartSpec:
    numeric = [c for c in summary.columns if c.kind is ColumnKind.NUMERIC]
    temporal = [c for c in summary.columns if c.kind is ColumnKind.TEMPORAL]
    categorical = [c for c in summary.columns if c.kind is ColumnKind.CATEGORICAL]

    title = question.strip().rstrip("?").capitalize() if question.strip() else "Query results"

    if temporal and numeric:
        x, y = temporal[0], numeric[0]
        return ChartSpec(kind=ChartKind.LINE, x=x.name, y=[y.name], title=title,
                         x_label=x.name, y_label=y.name)
    if len(numeric) >= 2:
        x, y = numeric[0], numeric[1]
        return ChartSpec(kind=ChartKind.SCATTER, x=x.name, y=[y.name], title=title,
                         x_label=x.name, y_label=y.name)
    if categorical and numeric:
        x, y = categorical[0], numeric[0]
        if x.distinct and summary.row_count / x.distinct >= BOX_MIN_ROWS_PER_GROUP:
            kind = ChartKind.BOX
        elif x.distinct <= PIE_MAX_CATEGORIES:
            kind = ChartKind.PIE
        else:
            kind = ChartKind.BAR
        return ChartSpec(kind=kind, x=x.name, y=[y.name], title=title,
                         x_label=x.name, y_label=y.name)
    raise PlanningError("no chartable column combination; present as a table")


_PLAN_PROMPT = (
    "Plan a chart for a query result.\n"
    "Question: {question}\n"
    "SPARQL query:\n{query}\n"
    "Result summary: {summary}\n"
    "Reply with a JSON object {{\"kind\", \"x\", \"y\", \"title\", \"x_label\", \"y_label\"}} "
    "where kind is one of bar, line, scatter, violin, box, pie; x is a column name; "
    "y is a list of column names.\n"
)

PLAN_REPAIR_ATTEMPTS = 3


def _parse_spec_json(text: str) -> ChartSpec:
    candidate = text.strip()
    match = re.search(r"\{.*\}", candidate, re.DOTALL)
    if not match:
        raise InputError("no JSON object in chart plan output")
    try:
        doc = json.loads(match.group(0))
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in chart plan: {exc}") from exc
    return ChartSpec.from_json(doc)


def plan_chart(question: str, query: str, rs: SparqlResultSet, summary: DataSummary,
               gateway: Optional[LlmGateway] = None) -> ChartSpec:
    """Produce a validated chart spec, repairing LLM output up to 3 times before
    falling back to the deterministic rules."""
    if gateway is not None:
        prompt = _PLAN_PROMPT.format(question=question, query=query,
                                     summary=json.dumps(summary.to_json(), sort_keys=True))
        for _ in range(PLAN_REPAIR_ATTEMPTS):
            try:
                raw = gateway.complete(prompt)
            except SparqllmError as exc:
                logger.warning("chart gateway failed (%s); using heuristic plan", exc)
                break
            try:
                spec = _parse_spec_json(raw)
                validate_chart_spec(spec, summary)
                return spec
            except InputError as exc:
                prompt += f"\nYour previous plan was rejected: {exc}. Return a corrected JSON object."
        logger.warning("no valid chart plan from gateway; using heuristic plan")
    spec = _heuristic_chart(question, summary)
    validate_chart_spec(spec, summary)
    return spec


def plan_table(rs: SparqlResultSet, title: str = "") -> ChartSpec:
    return ChartSpec(kind=ChartKind.TABLE, title=title)


# ---------------------------------------------------------------------------
# Text rendering

def _cell_text(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, Literal):
        return cell.lexical
    return cell


def render_table_text(rs: SparqlResultSet, max_rows: int = 50) -> str:
    """Aligned monospace table with a truncation footer."""
    header = list(rs.variables)
    shown = rs.bindings[:max_rows]
    grid = [header] + [[_cell_text(c) for c in row] for row in shown]
    widths = [max(len(row[i]) for row in grid) for i in range(len(header))] if header else []

    def line(row: list[str]) -> str:
        return "| " + " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) + " |"

    border = "+" + "+".join("-" * (w + 2) for w in widths) + "+" if header else "++"
    out = [border, line(header), border]
    for row in grid[1:]:
        out.append(line(row))
    out.append(border)
    remaining = rs.row_count - len(shown)
    if remaining > 0:
        out.append(f"... {remaining} more")
    if rs.row_count == 0:
        out.append("0 rows")
    return "\n".join(out)
