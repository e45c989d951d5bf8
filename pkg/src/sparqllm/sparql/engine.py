"""In-process triple store executing the parsed SPARQL subset.

Intended as a desk-scale stand-in for an external SPARQL 1.1 endpoint: same
query/update surface, RDF set semantics, deterministic solution order
(insertion order of triples; add ORDER BY for a total order).
"""

from __future__ import annotations

import math
import re
import threading
from datetime import date, datetime
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Optional, Union

from ..kg.results import SparqlResultSet
from ..kg.terms import (
    Literal,
    NUMERIC_DATATYPES,
    TEMPORAL_DATATYPES,
    Term,
    Triple,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
)
from .parser import (
    AskQuery,
    ClearOp,
    DeleteData,
    EAgg,
    EBin,
    ECall,
    EConst,
    EUnary,
    EVar,
    Expr,
    FilterClause,
    InsertData,
    OptionalGroup,
    SelectExpr,
    SelectQuery,
    SelectStar,
    SelectVar,
    SparqlSyntaxError,
    TriplePattern,
    Var,
    parse_query,
    parse_update,
)

Solution = dict[str, Term]


class _ExprError(Exception):
    """Expression evaluation error; eliminates the solution per SPARQL semantics."""


class MemoryTripleStore:
    """Thread-safe set of triples with SPARQL subset execution."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: dict[Triple, None] = {}
        self._lock = threading.Lock()
        for t in triples:
            self._triples.setdefault(t, None)

    def __len__(self) -> int:
        return len(self._triples)

    def add_many(self, triples: Iterable[Triple]) -> int:
        with self._lock:
            before = len(self._triples)
            for t in triples:
                self._triples.setdefault(t, None)
            return len(self._triples) - before

    def remove_many(self, triples: Iterable[Triple]) -> int:
        with self._lock:
            removed = 0
            for t in triples:
                if self._triples.pop(t, "?") != "?":
                    removed += 1
            return removed

    def clear(self):
        with self._lock:
            self._triples.clear()

    def snapshot(self) -> list[Triple]:
        with self._lock:
            return list(self._triples)

    # -- protocol-level entry points -------------------------------------
    def query(self, text: str) -> Union[SparqlResultSet, bool]:
        parsed = parse_query(text)
        triples = self.snapshot()
        if isinstance(parsed, AskQuery):
            return bool(_eval_group(parsed.where, triples, [{}]))
        return _eval_select(parsed, triples)

    def update(self, text: str) -> None:
        for op in parse_update(text):
            if isinstance(op, InsertData):
                self.add_many(op.triples)
            elif isinstance(op, DeleteData):
                self.remove_many(op.triples)
            elif isinstance(op, ClearOp):
                self.clear()


# ---------------------------------------------------------------------------
# Pattern matching

def _match_term(pattern, value: Term, binding: Solution) -> Optional[Solution]:
    if isinstance(pattern, Var):
        bound = binding.get(pattern.name)
        if bound is None:
            out = dict(binding)
            out[pattern.name] = value
            return out
        return binding if bound == value else None
    return binding if pattern == value else None


def _eval_pattern(pattern: TriplePattern, triples: list[Triple], solutions: list[Solution]) -> list[Solution]:
    out: list[Solution] = []
    for sol in solutions:
        for t in triples:
            step = _match_term(pattern.subject, t.subject, sol)
            if step is None:
                continue
            step = _match_term(pattern.predicate, t.predicate, step)
            if step is None:
                continue
            step = _match_term(pattern.object, t.object, step)
            if step is not None:
                out.append(step)
    return out


def _eval_group(elements: list, triples: list[Triple], solutions: list[Solution]) -> list[Solution]:
    sols = solutions
    filters: list[FilterClause] = []
    for el in elements:
        if isinstance(el, TriplePattern):
            sols = _eval_pattern(el, triples, sols)
        elif isinstance(el, OptionalGroup):
            extended: list[Solution] = []
            for sol in sols:
                matches = _eval_group(el.elements, triples, [sol])
                extended.extend(matches if matches else [sol])
            sols = extended
        elif isinstance(el, FilterClause):
            filters.append(el)
    for f in filters:
        kept = []
        for sol in sols:
            try:
                if _ebv(_eval_expr(f.expr, sol)):
                    kept.append(sol)
            except _ExprError:
                continue
        sols = kept
    return sols


# ---------------------------------------------------------------------------
# Value model

_INT_DATATYPES = frozenset(dt for dt in NUMERIC_DATATYPES if "int" in dt.lower() or dt.endswith(("long", "short", "byte")))


def _numeric_value(lexical: str, datatype: str) -> Union[Fraction, float]:
    lex = lexical.strip()
    if lex in ("INF", "+INF"):
        return math.inf
    if lex == "-INF":
        return -math.inf
    if lex == "NaN":
        return math.nan
    try:
        return Fraction(Decimal(lex))
    except (InvalidOperation, ValueError) as exc:
        raise _ExprError(f"not a number: {lexical!r}") from exc


_DT_FORMATS = ("%Y-%m-%dT%H:%M:%S.%f", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S.%f",
               "%Y-%m-%d %H:%M:%S", "%Y-%m-%d")


def parse_temporal(lexical: str) -> datetime:
    lex = lexical.strip()
    # tolerate trailing zone designators by dropping them (desk fixtures are naive)
    lex = re.sub(r"(Z|[+-]\d{2}:\d{2})$", "", lex)
    for fmt in _DT_FORMATS:
        try:
            return datetime.strptime(lex, fmt)
        except ValueError:
            continue
    raise _ExprError(f"not a dateTime: {lexical!r}")


def _as_number(value) -> Union[Fraction, float]:
    if isinstance(value, bool):
        raise _ExprError("boolean where number expected")
    if isinstance(value, (int, Fraction, float)):
        return value if not isinstance(value, int) else Fraction(value)
    if isinstance(value, Literal) and value.datatype in NUMERIC_DATATYPES:
        return _numeric_value(value.lexical, value.datatype)
    raise _ExprError("not a numeric value")


def _as_string(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, Literal) and value.datatype == XSD_STRING:
        return value.lexical
    raise _ExprError("not a string value")


def _as_datetime(value) -> datetime:
    if isinstance(value, datetime):
        return value
    if isinstance(value, Literal) and value.datatype in TEMPORAL_DATATYPES:
        return parse_temporal(value.lexical)
    raise _ExprError("not a temporal value")


def _ebv(value) -> bool:
    """Effective boolean value."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float, Fraction)):
        return bool(value) and not (isinstance(value, float) and math.isnan(value))
    if isinstance(value, str):
        return len(value) > 0
    if isinstance(value, Literal):
        if value.datatype == XSD_BOOLEAN:
            return value.lexical.strip() == "true"
        if value.datatype in NUMERIC_DATATYPES:
            num = _numeric_value(value.lexical, value.datatype)
            return bool(num) and not (isinstance(num, float) and math.isnan(num))
        return len(value.lexical) > 0
    raise _ExprError("no effective boolean value")


def _compare(op: str, left, right) -> bool:
    try:
        l, r = _as_number(left), _as_number(right)
    except _ExprError:
        pass
    else:
        return _apply_cmp(op, l, r)
    try:
        l, r = _as_datetime(left), _as_datetime(right)
    except _ExprError:
        pass
    else:
        return _apply_cmp(op, l, r)
    try:
        l, r = _as_string(left), _as_string(right)
    except _ExprError:
        pass
    else:
        return _apply_cmp(op, l, r)
    if isinstance(left, bool) and isinstance(right, bool):
        return _apply_cmp(op, left, right)
    if op in ("=", "!="):
        if isinstance(left, (str, Literal)) and isinstance(right, (str, Literal)):
            return (left == right) if op == "=" else (left != right)
    raise _ExprError(f"cannot compare {left!r} and {right!r}")


def _apply_cmp(op: str, l, r) -> bool:
    if op == "=":
        return l == r
    if op == "!=":
        return l != r
    if op == "<":
        return l < r
    if op == "<=":
        return l <= r
    if op == ">":
        return l > r
    if op == ">=":
        return l >= r
    raise _ExprError(f"unknown comparison {op}")


def _eval_expr(expr: Expr, sol: Solution, group: Optional[list[Solution]] = None):
    if isinstance(expr, EVar):
        if expr.name not in sol:
            raise _ExprError(f"unbound variable ?{expr.name}")
        return sol[expr.name]
    if isinstance(expr, EConst):
        return expr.term
    if isinstance(expr, EUnary):
        if expr.op == "!":
            return not _ebv(_eval_expr(expr.operand, sol, group))
        return -_as_number(_eval_expr(expr.operand, sol, group))
    if isinstance(expr, EBin):
        return _eval_binary(expr, sol, group)
    if isinstance(expr, ECall):
        return _eval_call(expr, sol, group)
    if isinstance(expr, EAgg):
        if group is None:
            raise _ExprError("aggregate used outside of a grouped query")
        return _eval_aggregate(expr, group)
    raise _ExprError(f"unsupported expression {expr!r}")


def _eval_binary(expr: EBin, sol: Solution, group):
    op = expr.op
    if op == "&&":
        return _ebv(_eval_expr(expr.left, sol, group)) and _ebv(_eval_expr(expr.right, sol, group))
    if op == "||":
        return _ebv(_eval_expr(expr.left, sol, group)) or _ebv(_eval_expr(expr.right, sol, group))
    left = _eval_expr(expr.left, sol, group)
    right = _eval_expr(expr.right, sol, group)
    if op in ("=", "!=", "<", "<=", ">", ">="):
        return _compare(op, left, right)
    l, r = _as_number(left), _as_number(right)
    if op == "+":
        return l + r
    if op == "-":
        return l - r
    if op == "*":
        return l * r
    if op == "/":
        if r == 0:
            raise _ExprError("division by zero")
        return Fraction(l) / Fraction(r) if not (isinstance(l, float) or isinstance(r, float)) else l / r
    raise _ExprError(f"unknown operator {op}")


def _eval_call(expr: ECall, sol: Solution, group):
    name = expr.name

    if name == "bound":
        arg = expr.args[0]
        if not isinstance(arg, EVar):
            raise _ExprError("BOUND expects a variable")
        return arg.name in sol

    args = [_eval_expr(a, sol, group) for a in expr.args]

    if name == "regex":
        flags = 0
        if len(args) == 3 and "i" in _as_string(args[2]):
            flags = re.IGNORECASE
        try:
            return re.search(_as_string(args[1]), _string_form(args[0]), flags) is not None
        except re.error as exc:
            raise _ExprError(f"bad regex: {exc}") from exc
    if name == "str":
        return _string_form(args[0])
    if name == "lang":
        return ""
    if name == "datatype":
        if isinstance(args[0], Literal):
            return args[0].datatype
        raise _ExprError("DATATYPE expects a literal")
    if name == "contains":
        return _as_string(args[1]) in _as_string(args[0])
    if name == "strstarts":
        return _as_string(args[0]).startswith(_as_string(args[1]))
    if name == "strends":
        return _as_string(args[0]).endswith(_as_string(args[1]))
    if name == "strlen":
        return len(_as_string(args[0]))
    if name == "lcase":
        return _as_string(args[0]).lower()
    if name == "ucase":
        return _as_string(args[0]).upper()
    if name == "abs":
        return abs(_as_number(args[0]))
    if name == "ceil":
        return math.ceil(_as_number(args[0]))
    if name == "floor":
        return math.floor(_as_number(args[0]))
    if name == "round":
        return math.floor(_as_number(args[0]) + Fraction(1, 2))
    if name in ("year", "month", "day", "hours", "minutes", "seconds"):
        dt = _as_datetime(args[0])
        return {
            "year": dt.year, "month": dt.month, "day": dt.day,
            "hours": dt.hour, "minutes": dt.minute, "seconds": dt.second,
        }[name]
    if name in ("isiri", "isuri"):
        return isinstance(args[0], str)
    if name == "isliteral":
        return isinstance(args[0], Literal)
    if name == "isnumeric":
        return isinstance(args[0], Literal) and args[0].datatype in NUMERIC_DATATYPES
    if name == "isblank":
        return False
    if name.startswith("http"):
        return _eval_cast(name, args[0])
    raise _ExprError(f"unsupported function {name}")


def _string_form(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, Literal):
        return value.lexical
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float, Fraction)):
        return _number_lexical(value)
    if isinstance(value, datetime):
        return value.isoformat()
    raise _ExprError("STR: unsupported value")


def _eval_cast(datatype: str, value):
    lex = _string_form(value)
    if datatype == XSD_DATETIME or datatype == XSD_DATE:
        parse_temporal(lex)
        return Literal(lex, datatype)
    if datatype in NUMERIC_DATATYPES:
        _numeric_value(lex, datatype)
        return Literal(lex, datatype)
    if datatype == XSD_BOOLEAN:
        if lex not in ("true", "false", "0", "1"):
            raise _ExprError(f"cannot cast {lex!r} to boolean")
        return Literal("true" if lex in ("true", "1") else "false", XSD_BOOLEAN)
    if datatype == XSD_STRING:
        return Literal(lex, XSD_STRING)
    raise _ExprError(f"unsupported cast to <{datatype}>")


# ---------------------------------------------------------------------------
# Aggregation

def _eval_aggregate(agg: EAgg, group: list[Solution]):
    if agg.func == "count" and agg.arg is None:
        if agg.distinct:
            return len({tuple(sorted((k, _term_key(v)) for k, v in sol.items())) for sol in group})
        return len(group)
    values = []
    for sol in group:
        try:
            values.append(_eval_expr(agg.arg, sol))
        except _ExprError:
            continue
    if agg.distinct:
        seen = set()
        unique = []
        for v in values:
            key = _runtime_key(v)
            if key not in seen:
                seen.add(key)
                unique.append(v)
        values = unique
    if agg.func == "count":
        return len(values)
    if agg.func in ("sum", "avg"):
        numbers = [_as_number(v) for v in values]
        if agg.func == "sum":
            return sum(numbers, Fraction(0))
        if not numbers:
            raise _ExprError("AVG over empty group")
        return sum(numbers, Fraction(0)) / len(numbers)
    if agg.func in ("min", "max"):
        if not values:
            raise _ExprError(f"{agg.func.upper()} over empty group")
        keyed = sorted(values, key=_order_key)
        return keyed[0] if agg.func == "min" else keyed[-1]
    raise _ExprError(f"unsupported aggregate {agg.func}")


def _term_key(term: Term):
    if isinstance(term, Literal):
        return ("lit", term.lexical, term.datatype)
    return ("iri", term)


def _runtime_key(value):
    if isinstance(value, Literal):
        return ("lit", value.lexical, value.datatype)
    if isinstance(value, str):
        return ("iri", value)
    if isinstance(value, Fraction):
        return ("num", value)
    return ("py", repr(value))


# ---------------------------------------------------------------------------
# Ordering & output conversion

def _order_key(value):
    """Total-order key across the value domain: unbound < IRI < numbers < datetimes < other."""
    if value is None:
        return (0, "")
    if isinstance(value, str):
        return (1, value)
    try:
        num = _as_number(value)
        if isinstance(num, float) and math.isnan(num):
            return (2, math.inf)
        return (2, num)
    except _ExprError:
        pass
    try:
        return (3, _as_datetime(value))
    except _ExprError:
        pass
    if isinstance(value, bool):
        return (4, "true" if value else "false")
    if isinstance(value, Literal):
        return (5, value.lexical, value.datatype)
    return (6, repr(value))


def _rank_cmp(a, b) -> int:
    ka, kb = _order_key(a), _order_key(b)
    if ka[0] != kb[0]:
        return -1 if ka[0] < kb[0] else 1
    if ka == kb:
        return 0
    try:
        return -1 if ka < kb else 1
    except TypeError:
        sa, sb = repr(ka), repr(kb)
        return -1 if sa < sb else (0 if sa == sb else 1)


def _number_lexical(num) -> str:
    if isinstance(num, bool):
        return "true" if num else "false"
    if isinstance(num, int):
        return str(num)
    if isinstance(num, float):
        if math.isinf(num):
            return "INF" if num > 0 else "-INF"
        if math.isnan(num):
            return "NaN"
        return repr(num)
    if isinstance(num, Fraction):
        if num.denominator == 1:
            return str(num.numerator)
        dec = Decimal(num.numerator) / Decimal(num.denominator)
        return format(dec.normalize(), "f")
    return str(num)


def _to_term(value) -> Term:
    if isinstance(value, (Literal, str)):
        return value
    if isinstance(value, bool):
        return Literal("true" if value else "false", XSD_BOOLEAN)
    if isinstance(value, int):
        return Literal(str(value), XSD_INTEGER)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return Literal(str(value.numerator), XSD_INTEGER)
        try:
            dec = Decimal(value.numerator) / Decimal(value.denominator)
            return Literal(format(dec.normalize(), "f"), XSD_DECIMAL)
        except InvalidOperation:
            return Literal(repr(value.numerator / value.denominator), XSD_DOUBLE)
    if isinstance(value, float):
        return Literal(_number_lexical(value), XSD_DOUBLE)
    if isinstance(value, datetime):
        return Literal(value.isoformat(), XSD_DATETIME)
    if isinstance(value, date):
        return Literal(value.isoformat(), XSD_DATE)
    raise _ExprError(f"value {value!r} has no RDF term form")


# ---------------------------------------------------------------------------
# SELECT evaluation

def _collect_vars(elements: list, acc: list[str]):
    for el in elements:
        if isinstance(el, TriplePattern):
            for part in (el.subject, el.predicate, el.object):
                if isinstance(part, Var) and part.name not in acc:
                    acc.append(part.name)
        elif isinstance(el, OptionalGroup):
            _collect_vars(el.elements, acc)


def _has_aggregate(expr: Expr) -> bool:
    if isinstance(expr, EAgg):
        return True
    if isinstance(expr, EBin):
        return _has_aggregate(expr.left) or _has_aggregate(expr.right)
    if isinstance(expr, EUnary):
        return _has_aggregate(expr.operand)
    if isinstance(expr, ECall):
        return any(_has_aggregate(a) for a in expr.args)
    return False


def _eval_select(query: SelectQuery, triples: list[Triple]) -> SparqlResultSet:
    solutions = _eval_group(query.where, triples, [{}])

    projection = list(query.projection)
    if any(isinstance(p, SelectStar) for p in projection):
        in_scope: list[str] = []
        _collect_vars(query.where, in_scope)
        expanded: list = []
        for p in projection:
            if isinstance(p, SelectStar):
                expanded.extend(SelectVar(v) for v in in_scope)
            else:
                expanded.append(p)
        projection = expanded

    aggregated = bool(query.group_by) or any(
        isinstance(p, SelectExpr) and _has_aggregate(p.expr) for p in projection
    )

    names = [p.name if isinstance(p, SelectVar) else p.alias for p in projection]
    if len(set(names)) != len(names):
        raise SparqlSyntaxError("duplicate variable in projection", 0)

    if aggregated:
        rows_solutions = _aggregate_rows(query, projection, solutions)
    else:
        rows_solutions = [( _project_row(projection, sol, None), sol) for sol in solutions]

    if query.order_by:
        def compare(a, b):
            for expr, asc in query.order_by:
                va = _order_value(expr, a[0], a[1], names)
                vb = _order_value(expr, b[0], b[1], names)
                c = _rank_cmp(va, vb)
                if c:
                    return c if asc else -c
            return 0

        rows_solutions = sorted(rows_solutions, key=cmp_to_key(compare))

    rows = [row for row, _ in rows_solutions]
    if query.distinct:
        seen = set()
        unique = []
        for row in rows:
            key = tuple(None if c is None else _term_key(c) for c in row)
            if key not in seen:
                seen.add(key)
                unique.append(row)
        rows = unique

    offset = query.offset or 0
    if offset:
        rows = rows[offset:]
    if query.limit is not None:
        rows = rows[: query.limit]

    return SparqlResultSet(variables=names, bindings=rows)


def _project_row(projection: list, sol: Solution, group: Optional[list[Solution]]) -> list[Optional[Term]]:
    row: list[Optional[Term]] = []
    for p in projection:
        if isinstance(p, SelectVar):
            row.append(sol.get(p.name))
        else:
            try:
                row.append(_to_term(_eval_expr(p.expr, sol, group)))
            except _ExprError:
                row.append(None)
    return row


def _aggregate_rows(query: SelectQuery, projection: list, solutions: list[Solution]):
    group_vars = query.group_by
    for p in projection:
        if isinstance(p, SelectVar) and p.name not in group_vars:
            raise SparqlSyntaxError(
                f"variable ?{p.name} must appear in GROUP BY or inside an aggregate", 0
            )
    groups: dict[tuple, list[Solution]] = {}
    if group_vars:
        for sol in solutions:
            key = tuple(_term_key(sol[v]) if v in sol else ("unbound",) for v in group_vars)
            groups.setdefault(key, []).append(sol)
    else:
        groups[()] = list(solutions)

    rows = []
    for members in groups.values():
        rep = members[0] if members else {}
        rows.append((_project_row(projection, rep, members), rep))
    return rows


def _order_value(expr: Expr, row: list, sol: Solution, names: list[str]):
    if isinstance(expr, EVar) and expr.name in names:
        return row[names.index(expr.name)]
    try:
        return _eval_expr(expr, sol, None)
    except _ExprError:
        return None
