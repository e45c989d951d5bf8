"""Generation quality metrics (ESR, RCA, RMR, HRA), datatype-aware result
matching, and the end-to-end evaluation harness with per-entity/class/complexity
breakdowns.
"""

from __future__ import annotations

import itertools
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from ..errors import InputError, SparqllmError, UndefinedMetricError
from ..generation import GenerationExhausted, GenerationTrace, QueryGenerator
from ..kg.results import SparqlResultSet
from ..kg.terms import Literal, NUMERIC_DATATYPES, TEMPORAL_DATATYPES
from ..sparql.engine import parse_temporal

logger = logging.getLogger(__name__)

COMPLEXITIES = ("SIMPLE", "MEDIUM", "COMPLEX")


# ---------------------------------------------------------------------------
# Metrics

def esr(outcomes: Sequence["EvalOutcome"]) -> float:
    """Execution success rate: queries executed without error over all queries."""
    if not outcomes:
        raise UndefinedMetricError("ESR is undefined over zero outcomes")
    return sum(1 for o in outcomes if o.executed) / len(outcomes)


def rca(outcomes: Sequence["EvalOutcome"]) -> float:
    """Result count accuracy over successful executions; undefined when none."""
    executed = [o for o in outcomes if o.executed]
    if not executed:
        raise UndefinedMetricError("RCA is undefined: no query executed successfully")
    return sum(1 for o in executed if o.count_correct) / len(executed)


def rmr(outcomes: Sequence["EvalOutcome"]) -> float:
    """Result match rate over successful executions; undefined when none."""
    executed = [o for o in outcomes if o.executed]
    if not executed:
        raise UndefinedMetricError("RMR is undefined: no query executed successfully")
    return sum(1 for o in executed if o.content_match) / len(executed)


def hra(esr_value: float, rmr_value: float) -> float:
    """Harmonic mean of ESR and RMR; zero when both vanish."""
    for name, value in (("esr", esr_value), ("rmr", rmr_value)):
        if not 0.0 <= value <= 1.0:
            raise InputError(f"{name} must be within [0, 1], got {value}")
    if esr_value == 0.0 and rmr_value == 0.0:
        return 0.0
    return 2.0 * esr_value * rmr_value / (esr_value + rmr_value)


# ---------------------------------------------------------------------------
# Result matching

@dataclass
class MatchReport:
    matched: bool
    diagnostic: Optional[str] = None


def _canon_cell(cell) -> tuple:
    if cell is None:
        return ("unbound",)
    if isinstance(cell, str):
        return ("iri", cell)
    if isinstance(cell, Literal):
        if cell.datatype in NUMERIC_DATATYPES:
            lex = cell.lexical.strip()
            if lex in ("INF", "+INF"):
                return ("num-inf", 1)
            if lex == "-INF":
                return ("num-inf", -1)
            if lex == "NaN":
                return ("num-nan",)
            try:
                return ("num", Fraction(Decimal(lex)))
            except (InvalidOperation, ValueError):
                return ("lit", cell.datatype, cell.lexical)
        if cell.datatype in TEMPORAL_DATATYPES:
            try:
                return ("time", parse_temporal(cell.lexical))
            except Exception:
                return ("lit", cell.datatype, cell.lexical)
        if cell.datatype.endswith("#string"):
            return ("str", cell.lexical)
        return ("lit", cell.datatype, cell.lexical)
    return ("other", repr(cell))


_PERMUTATION_BUDGET = 1000


def result_match_verbose(actual: SparqlResultSet, expected: SparqlResultSet) -> MatchReport:
    """Multiset row equality up to column renaming, with numeric/temporal-aware cells.

    Expected columns are taken in name order; actual columns are aligned to them
    by value signature.  Ambiguous signatures trigger a bounded permutation
    search; past the budget the comparison reports a non-match with a diagnostic.
    """
    if len(actual.variables) != len(expected.variables):
        return MatchReport(False, f"column count differs: actual {len(actual.variables)}, "
                                  f"expected {len(expected.variables)}")
    if actual.row_count != expected.row_count:
        return MatchReport(False, f"row count differs: actual {actual.row_count}, "
                                  f"expected {expected.row_count}")
    if not expected.variables:
        return MatchReport(True)

    exp_order = sorted(expected.variables)
    exp_cols = {name: [_canon_cell(c) for c in expected.column(name)] for name in exp_order}
    act_cols = {name: [_canon_cell(c) for c in actual.column(name)] for name in actual.variables}

    exp_signatures = {name: Counter(cells) for name, cells in exp_cols.items()}
    act_signatures = {name: Counter(cells) for name, cells in act_cols.items()}

    candidates: dict[str, list[str]] = {}
    for exp_name in exp_order:
        matches = [a for a, sig in act_signatures.items() if sig == exp_signatures[exp_name]]
        if not matches:
            return MatchReport(False, f"no actual column matches the values of expected "
                                      f"column ?{exp_name}")
        candidates[exp_name] = sorted(matches)

    def rows_equal(alignment: dict[str, str]) -> Optional[int]:
        """Returns the first differing row index, or None when multisets match."""
        exp_rows = Counter(
            tuple(exp_cols[name][r] for name in exp_order) for r in range(expected.row_count)
        )
        act_rows = Counter(
            tuple(act_cols[alignment[name]][r] for name in exp_order)
            for r in range(actual.row_count)
        )
        if exp_rows == act_rows:
            return None
        for r in range(expected.row_count):
            row = tuple(exp_cols[name][r] for name in exp_order)
            if act_rows[row] < exp_rows[row]:
                return r
        return expected.row_count

    # fast path: every expected column has a unique candidate
    if all(len(c) == 1 for c in candidates.values()):
        alignment = {e: c[0] for e, c in candidates.items()}
        if len(set(alignment.values())) != len(alignment):
            return MatchReport(False, "two expected columns map onto one actual column")
        differing = rows_equal(alignment)
        if differing is None:
            return MatchReport(True)
        return MatchReport(False, f"rows differ despite equal column signatures; first "
                                  f"differing expected row index {differing}")

    # ambiguous signatures: bounded search over consistent bijections
    total = 1
    for c in candidates.values():
        total *= len(c)
        if total > _PERMUTATION_BUDGET:
            return MatchReport(False, "ambiguous column alignment: too many equal-signature "
                                      "columns to disambiguate")
    for combo in itertools.product(*(candidates[name] for name in exp_order)):
        if len(set(combo)) != len(combo):
            continue
        alignment = dict(zip(exp_order, combo))
        if rows_equal(alignment) is None:
            return MatchReport(True)
    return MatchReport(False, "no column alignment reproduces the expected rows")


def result_match(actual: SparqlResultSet, expected: SparqlResultSet) -> bool:
    return result_match_verbose(actual, expected).matched


# ---------------------------------------------------------------------------
# Samples and outcomes

@dataclass
class EvalSample:
    question: str
    gold_query: str
    entity: str
    complexity: str
    expected_count: int
    expected_results: Optional[SparqlResultSet] = None
    id: str = ""

    def __post_init__(self):
        if self.expected_count < 0:
            raise InputError("expected_count must be >= 0")
        normalized = self.complexity.strip().upper()
        if normalized not in COMPLEXITIES:
            raise InputError(f"unknown complexity {self.complexity!r}")
        self.complexity = normalized

    @property
    def query_class(self) -> str:
        """Query class implied by the gold query's shape."""
        if re.search(r"\bGROUP\s+BY\b", self.gold_query, re.IGNORECASE):
            return "GROUP_BY"
        if re.search(r"\bFILTER\b", self.gold_query, re.IGNORECASE):
            return "FILTER"
        return "SELECT"


@dataclass
class EvalOutcome:
    sample_id: str
    entity: str
    query_class: str
    complexity: str
    executed: bool
    returned_count: int = 0
    count_correct: bool = False
    content_match: bool = False
    attempts: int = 0
    final_query: Optional[str] = None
    error: Optional[str] = None
    trace: Optional[GenerationTrace] = None

    def __post_init__(self):
        if not self.executed and (self.count_correct or self.content_match):
            raise InputError("count_correct/content_match require executed")

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "entity": self.entity,
            "query_class": self.query_class,
            "complexity": self.complexity,
            "executed": self.executed,
            "returned_count": self.returned_count,
            "count_correct": self.count_correct,
            "content_match": self.content_match,
            "attempts": self.attempts,
            "final_query": self.final_query,
            "error": self.error,
        }


def load_generation_dataset(source: Union[str, Path]) -> list[EvalSample]:
    """JSONL rows: question, gold_query, entity, complexity, expected_count,
    expected_results (inline SPARQL results JSON, optional)."""
    samples = []
    lines = Path(source).read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            expected = doc.get("expected_results")
            samples.append(EvalSample(
                question=doc["question"],
                gold_query=doc["gold_query"],
                entity=doc["entity"],
                complexity=doc["complexity"],
                expected_count=int(doc["expected_count"]),
                expected_results=SparqlResultSet.from_json(expected) if expected else None,
                id=str(doc.get("id", f"sample-{lineno}")),
            ))
        except (KeyError, ValueError, InputError) as exc:
            raise InputError(f"generation dataset line {lineno}: {exc}") from exc
    return samples


# ---------------------------------------------------------------------------
# Harness

def _metric_block(outcomes: Sequence[EvalOutcome]) -> dict:
    block: dict = {"total": len(outcomes), "executed": sum(1 for o in outcomes if o.executed)}
    block["esr"] = esr(outcomes)
    try:
        block["rca"] = rca(outcomes)
    except UndefinedMetricError:
        block["rca"] = None
    try:
        block["rmr"] = rmr(outcomes)
    except UndefinedMetricError:
        block["rmr"] = None
    block["hra"] = hra(block["esr"], block["rmr"]) if block["rmr"] is not None else (
        0.0 if block["esr"] == 0.0 else None
    )
    return block


@dataclass
class GenerationReport:
    config: dict
    outcomes: list[EvalOutcome]
    overall: dict = field(default_factory=dict)
    by_entity: dict = field(default_factory=dict)
    by_class: dict = field(default_factory=dict)
    by_complexity: dict = field(default_factory=dict)

    def recompute(self) -> "GenerationReport":
        self.overall = _metric_block(self.outcomes)
        self.by_entity = {
            entity: _metric_block([o for o in self.outcomes if o.entity == entity])
            for entity in sorted({o.entity for o in self.outcomes})
        }
        self.by_class = {
            cls: _metric_block([o for o in self.outcomes if o.query_class == cls])
            for cls in sorted({o.query_class for o in self.outcomes})
        }
        self.by_complexity = {
            cx: _metric_block([o for o in self.outcomes if o.complexity == cx])
            for cx in [c for c in COMPLEXITIES if any(o.complexity == c for o in self.outcomes)]
        }
        return self

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "overall": self.overall,
            "by_entity": self.by_entity,
            "by_class": self.by_class,
            "by_complexity": self.by_complexity,
            "outcomes": [o.to_json() for o in self.outcomes],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def render_text(self) -> str:
        def fmt(value) -> str:
            return "n/a" if value is None else f"{100.0 * value:.1f}%"

        lines = ["generation evaluation", f"  templates: {'on' if self.config.get('with_templates', True) else 'off'}",
                 f"  samples:   {self.overall.get('total', 0)}", ""]
        header = f"{'group':<24} {'ESR':>8} {'RCA':>8} {'RMR':>8} {'HRA':>8}"
        lines.append(header)
        lines.append("-" * len(header))

        def row(name: str, block: dict) -> str:
            return (f"{name:<24} {fmt(block['esr']):>8} {fmt(block['rca']):>8} "
                    f"{fmt(block['rmr']):>8} {fmt(block['hra']):>8}")

        lines.append(row("overall", self.overall))
        for title, blocks in (("entity", self.by_entity), ("class", self.by_class),
                              ("complexity", self.by_complexity)):
            for key, block in blocks.items():
                lines.append(row(f"{title}:{key}", block))
        return "\n".join(lines)


def run_generation_eval(samples: Sequence[EvalSample], generator: QueryGenerator,
                        config: Optional[dict] = None) -> GenerationReport:
    """Evaluate each sample through the full pipeline; per-sample failures become
    outcomes, never aborts."""
    outcomes: list[EvalOutcome] = []
    for sample in samples:
        base = dict(sample_id=sample.id, entity=sample.entity,
                    query_class=sample.query_class, complexity=sample.complexity)
        try:
            results, trace = generator.generate(sample.question)
        except GenerationExhausted as exc:
            outcomes.append(EvalOutcome(executed=False, attempts=len(exc.trace.attempts),
                                        error=str(exc), trace=exc.trace, **base))
            continue
        except SparqllmError as exc:
            outcomes.append(EvalOutcome(executed=False, error=str(exc), **base))
            continue
        matched = (result_match(results, sample.expected_results)
                   if sample.expected_results is not None else False)
        outcomes.append(EvalOutcome(
            executed=True,
            returned_count=results.row_count,
            count_correct=results.row_count == sample.expected_count,
            content_match=matched,
            attempts=len(trace.attempts),
            final_query=trace.final_query,
            trace=trace,
            **base,
        ))
    report = GenerationReport(config=dict(config or {}), outcomes=outcomes)
    return report.recompute()
