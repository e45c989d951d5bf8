"""SPARQL result sets and the application/sparql-results+json wire format."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .terms import Literal, Term, XSD_STRING


@dataclass
class SparqlResultSet:
    """Variables plus typed binding rows; one cell slot per variable per row."""

    variables: list[str]
    bindings: list[list[Optional[Term]]] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("result variables must be unique")
        for row in self.bindings:
            if len(row) != len(self.variables):
                raise ValueError("binding row width does not match variable count")

    @property
    def row_count(self) -> int:
        return len(self.bindings)

    def column(self, name: str) -> list[Optional[Term]]:
        idx = self.variables.index(name)
        return [row[idx] for row in self.bindings]

    def to_json(self) -> dict:
        rows = []
        for row in self.bindings:
            entry = {}
            for var, cell in zip(self.variables, row):
                if cell is None:
                    continue
                entry[var] = _cell_to_json(cell)
            rows.append(entry)
        return {"head": {"vars": list(self.variables)}, "results": {"bindings": rows}}

    @classmethod
    def from_json(cls, doc: dict) -> "SparqlResultSet":
        try:
            variables = list(doc["head"]["vars"])
            raw_rows = doc["results"]["bindings"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"not a SPARQL results JSON document: {exc}") from exc
        bindings = []
        for raw in raw_rows:
            row: list[Optional[Term]] = []
            for var in variables:
                cell = raw.get(var)
                row.append(None if cell is None else _cell_from_json(cell))
            bindings.append(row)
        return cls(variables=variables, bindings=bindings)


def _cell_to_json(cell: Term) -> dict:
    if isinstance(cell, Literal):
        out = {"type": "literal", "value": cell.lexical}
        if cell.datatype != XSD_STRING:
            out["datatype"] = cell.datatype
        return out
    return {"type": "uri", "value": cell}


def _cell_from_json(cell: dict) -> Term:
    kind = cell.get("type")
    value = cell.get("value", "")
    if kind == "uri":
        return value
    if kind in ("literal", "typed-literal"):
        return Literal(value, cell.get("datatype") or XSD_STRING)
    if kind == "bnode":
        # blank node labels are carried as opaque IRIs in the _: scheme
        return f"_:{value}" if not value.startswith("_:") else value
    raise ValueError(f"unknown binding cell type: {kind!r}")
