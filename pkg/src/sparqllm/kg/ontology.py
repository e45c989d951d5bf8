"""Ontology schema: classes and properties, rendered as prompt-ready text."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from ..errors import InputError
from .terms import is_absolute_iri
from .mapping import MappingRule


@dataclass(frozen=True)
class OntologyClass:
    iri: str
    label: str


@dataclass(frozen=True)
class OntologyProperty:
    iri: str
    label: str
    domain: str
    range: str


@dataclass
class OntologySchema:
    classes: list[OntologyClass] = field(default_factory=list)
    properties: list[OntologyProperty] = field(default_factory=list)
    prefixes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        declared = {c.iri for c in self.classes}
        for prop in self.properties:
            for ref in (prop.domain, prop.range):
                if ref not in declared and not ref.startswith("http://www.w3.org/2001/XMLSchema#"):
                    raise InputError(
                        f"property {prop.iri} references undeclared class {ref!r}"
                    )

    @property
    def serialized_text(self) -> str:
        """Compact class/property listing injected into generation prompts."""
        lines = []
        for name, iri in sorted(self.prefixes.items()):
            lines.append(f"PREFIX {name}: <{iri}>")
        if self.prefixes:
            lines.append("")
        lines.append("Classes:")
        for cls in self.classes:
            lines.append(f"  - {cls.label}: <{cls.iri}>")
        lines.append("Properties:")
        for prop in self.properties:
            lines.append(f"  - {prop.label}: <{prop.iri}>  ({self._short(prop.domain)} -> {self._short(prop.range)})")
        return "\n".join(lines)

    def _short(self, iri: str) -> str:
        for cls in self.classes:
            if cls.iri == iri:
                return cls.label
        return iri.rsplit("#", 1)[-1].rsplit("/", 1)[-1]

    def known_predicates(self) -> set[str]:
        return {p.iri for p in self.properties}

    def check_mapping_alignment(self, mapping: list[MappingRule]) -> list[str]:
        """Report predicates a mapping uses that the ontology does not declare."""
        known = self.known_predicates() | {"http://www.w3.org/1999/02/22-rdf-syntax-ns#type"}
        issues = []
        for i, rule in enumerate(mapping):
            if rule.predicate not in known:
                issues.append(f"rule {i}: predicate <{rule.predicate}> is not declared in the ontology")
        return issues


def load_ontology(source: Union[str, Path, dict]) -> OntologySchema:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    classes = [OntologyClass(c["iri"], c["label"]) for c in doc.get("classes", [])]
    properties = [
        OntologyProperty(p["iri"], p["label"], p["domain"], p["range"])
        for p in doc.get("properties", [])
    ]
    for cls in classes:
        if not is_absolute_iri(cls.iri):
            raise InputError(f"class IRI is not absolute: {cls.iri!r}")
    return OntologySchema(classes=classes, properties=properties,
                          prefixes=dict(doc.get("prefixes", {})))
