"""Row-to-triple mapping: subject IRI templates plus per-rule object sources."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..errors import InputError, SparqllmError
from .cleaning import RowSet
from .terms import Literal, Triple, XSD_STRING, is_absolute_iri, pct_encode

_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")


class MappingError(SparqllmError):
    def __init__(self, message: str, rule_index: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message)
        self.rule_index = rule_index
        self.column = column


@dataclass(frozen=True)
class ObjectSpec:
    """Object source: a typed column literal, a column-driven IRI template, or a constant."""

    column: Optional[str] = None
    datatype: str = XSD_STRING
    iri_template: Optional[str] = None
    constant: Optional[Union[str, Literal]] = None

    def __post_init__(self):
        sources = [self.column is not None, self.iri_template is not None, self.constant is not None]
        if sum(sources) != 1:
            raise InputError("object spec needs exactly one of column / iri_template / constant")
        if self.column is not None and not is_absolute_iri(self.datatype):
            raise InputError(f"object datatype is not an absolute IRI: {self.datatype!r}")


@dataclass(frozen=True)
class MappingRule:
    subject_template: str
    predicate: str
    object: ObjectSpec

    def __post_init__(self):
        if not self.subject_template:
            raise InputError("subject_template must not be empty")
        if not is_absolute_iri(self.predicate):
            raise InputError(f"predicate is not an absolute IRI: {self.predicate!r}")

    def placeholders(self) -> list[str]:
        names = _PLACEHOLDER.findall(self.subject_template)
        if self.object.iri_template:
            names += _PLACEHOLDER.findall(self.object.iri_template)
        return names


def _substitute(template: str, rows: RowSet, row: list[str], rule_index: int) -> str:
    def repl(match: re.Match) -> str:
        name = match.group(1)
        try:
            idx = rows.columns.index(name)
        except ValueError:
            raise MappingError(
                f"rule {rule_index}: placeholder {{{name}}} names no column in the input",
                rule_index=rule_index, column=name,
            ) from None
        return pct_encode(row[idx])

    return _PLACEHOLDER.sub(repl, template)


def apply_mapping(rows: RowSet, mapping: list[MappingRule]) -> list[Triple]:
    """Apply every rule to every row, skipping rules whose object column is empty.

    Deterministic: output order is row-major, then rule order.  Substituted
    values are percent-encoded so subjects always parse as IRIs.
    """
    triples: list[Triple] = []
    for row in rows.rows:
        for i, rule in enumerate(mapping):
            obj = rule.object
            if obj.column is not None:
                idx = rows.columns.index(obj.column) if obj.column in rows.columns else None
                if idx is None:
                    raise MappingError(
                        f"rule {i}: object column {obj.column!r} not present in the input",
                        rule_index=i, column=obj.column,
                    )
                cell = row[idx]
                if cell == "":
                    continue  # missing field: skip this rule for this row
                term: Union[str, Literal] = Literal(cell, obj.datatype)
            elif obj.iri_template is not None:
                term = _substitute(obj.iri_template, rows, row, i)
                if not is_absolute_iri(term):
                    raise MappingError(
                        f"rule {i}: object template produced an invalid IRI: {term!r}",
                        rule_index=i,
                    )
            else:
                term = obj.constant  # type: ignore[assignment]
            subject = _substitute(rule.subject_template, rows, row, i)
            if not is_absolute_iri(subject):
                raise MappingError(
                    f"rule {i}: subject template produced an invalid IRI: {subject!r}",
                    rule_index=i,
                )
            triples.append(Triple(subject, rule.predicate, term))
    return triples


def _parse_object(doc: dict, index: int) -> ObjectSpec:
    if "column" in doc:
        return ObjectSpec(column=doc["column"], datatype=doc.get("datatype", XSD_STRING))
    if "iri_template" in doc:
        return ObjectSpec(iri_template=doc["iri_template"])
    if "constant" in doc:
        value = doc["constant"]
        if "datatype" in doc:
            return ObjectSpec(constant=Literal(str(value), doc["datatype"]))
        if isinstance(value, str) and is_absolute_iri(value):
            return ObjectSpec(constant=value)
        return ObjectSpec(constant=Literal(str(value)))
    raise MappingError(f"rule {index}: object needs column, iri_template or constant", rule_index=index)


def load_mapping(source: Union[str, Path, list]) -> list[MappingRule]:
    """Read mapping rules from a JSON array (or an already-parsed list)."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if not isinstance(doc, list):
        raise MappingError("mapping file must contain a JSON array of rules")
    rules = []
    for i, entry in enumerate(doc):
        try:
            rules.append(
                MappingRule(
                    subject_template=entry["subject_template"],
                    predicate=entry["predicate"],
                    object=_parse_object(entry["object"], i),
                )
            )
        except KeyError as exc:
            raise MappingError(f"rule {i}: missing field {exc}", rule_index=i) from exc
        except InputError as exc:
            raise MappingError(f"rule {i}: {exc}", rule_index=i) from exc
    return rules


def check_placeholders(rows: RowSet, mapping: list[MappingRule]) -> None:
    """Fail fast when a rule references a column the row set does not have."""
    for i, rule in enumerate(mapping):
        for name in rule.placeholders():
            if name not in rows.columns:
                raise MappingError(
                    f"rule {i}: placeholder {{{name}}} names no column in the input",
                    rule_index=i, column=name,
                )
        if rule.object.column is not None and rule.object.column not in rows.columns:
            raise MappingError(
                f"rule {i}: object column {rule.object.column!r} not present in the input",
                rule_index=i, column=rule.object.column,
            )
