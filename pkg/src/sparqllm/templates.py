"""SPARQL template corpus: loading, embedding-mode text selection, retrieval,
and retrieval-quality metrics (micro accuracy, multiclass MCC, confusion matrices).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .embeddings import EmbeddingGateway, embed_text
from .errors import InputError, StateError, UndefinedMetricError
from .ivf import IvfFlatIndex, Metric, build_index
from .sparql import validate_sparql

_PARAM = re.compile(r"\{\{([^{}]+)\}\}")

TARGET_SEPARATOR = "|"


class TemplateClass(str, Enum):
    SELECT = "SELECT"
    GROUP_BY = "GROUP_BY"
    FILTER = "FILTER"

    @classmethod
    def parse(cls, value: str) -> "TemplateClass":
        normalized = value.strip().upper().replace(" ", "_")
        try:
            return cls(normalized)
        except ValueError:
            raise InputError(
                f"unknown template class {value!r}; expected SELECT, GROUP_BY or FILTER"
            ) from None


class EmbeddingMode(str, Enum):
    DIRECT = "direct"
    DESCRIPTION = "description"
    COMBINED = "combined"

    @classmethod
    def parse(cls, value: Union[str, "EmbeddingMode"]) -> "EmbeddingMode":
        if isinstance(value, EmbeddingMode):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            raise InputError(f"unknown embedding mode {value!r}") from None


@dataclass(frozen=True)
class Template:
    id: str
    cls: TemplateClass
    entity: str
    sparql_text: str
    description: str = ""
    example_question: str = ""

    @property
    def target(self) -> str:
        return f"{self.cls.value}{TARGET_SEPARATOR}{self.entity}"

    def substituted(self, values: Optional[dict[str, str]] = None) -> str:
        """Fill ``{{param}}`` placeholders; missing params fall back to ``0``."""
        values = values or {}
        return _PARAM.sub(lambda m: values.get(m.group(1).strip(), "0"), self.sparql_text)

    def params(self) -> list[str]:
        return [m.strip() for m in _PARAM.findall(self.sparql_text)]


class TemplateLoadError(InputError):
    def __init__(self, issues: list[str]):
        super().__init__("template corpus failed validation:\n" + "\n".join(issues))
        self.issues = issues


def _template_from_doc(doc: dict) -> Template:
    return Template(
        id=str(doc["id"]),
        cls=TemplateClass.parse(doc["class"]),
        entity=str(doc["entity"]),
        sparql_text=doc["sparql_text"],
        description=doc.get("description", "") or "",
        example_question=doc.get("example_question", "") or "",
    )


def template_to_doc(t: Template) -> dict:
    return {
        "id": t.id,
        "class": t.cls.value,
        "entity": t.entity,
        "target": t.target,
        "sparql_text": t.sparql_text,
        "description": t.description,
        "example_question": t.example_question,
    }


def load_templates(source: Union[str, Path, Iterable[str]]) -> list[Template]:
    """Load a JSONL corpus, validating ids, classes, targets and template syntax."""
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = list(source)

    issues: list[str] = []
    templates: list[Template] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            issues.append(f"line {lineno}: invalid JSON ({exc})")
            continue
        try:
            template = _template_from_doc(doc)
        except (KeyError, InputError) as exc:
            issues.append(f"line {lineno}: {exc}")
            continue
        if "target" in doc and doc["target"] != template.target:
            issues.append(
                f"line {lineno}: target {doc['target']!r} does not equal class|entity "
                f"{template.target!r}"
            )
            continue
        if template.id in seen_ids:
            issues.append(f"line {lineno}: duplicate template id {template.id!r}")
            continue
        issue = validate_sparql(template.substituted())
        if issue is not None:
            issues.append(
                f"line {lineno}: template {template.id!r} is not valid SPARQL "
                f"(at {issue.position}: {issue.message})"
            )
            continue
        seen_ids.add(template.id)
        templates.append(template)
    if issues:
        raise TemplateLoadError(issues)
    return templates


def template_embedding_text(template: Template, mode: Union[str, EmbeddingMode]) -> Union[str, tuple[str, str]]:
    """The text(s) that represent a template in vector space under a mode."""
    mode = EmbeddingMode.parse(mode)
    if mode is EmbeddingMode.DIRECT:
        return template.sparql_text
    if not template.description.strip():
        raise InputError(
            f"template {template.id!r} has no description; {mode.value} mode needs one"
        )
    if mode is EmbeddingMode.DESCRIPTION:
        return template.description
    return template.sparql_text, template.description


def combine_vectors(direct: np.ndarray, description: np.ndarray) -> np.ndarray:
    """Order-independent fusion: normalize both, add, renormalize."""
    a = direct / np.linalg.norm(direct)
    b = description / np.linalg.norm(description)
    merged = a + b
    norm = float(np.linalg.norm(merged))
    if norm == 0.0:
        raise InputError("combined embedding collapsed to a zero vector")
    return merged / norm


def template_vector(template: Template, mode: EmbeddingMode, gateway: EmbeddingGateway) -> np.ndarray:
    text = template_embedding_text(template, mode)
    if isinstance(text, tuple):
        return combine_vectors(embed_text(text[0], gateway), embed_text(text[1], gateway))
    return embed_text(text, gateway)


class TemplateStore:
    """Immutable snapshot of a corpus plus its vector index."""

    def __init__(self, templates: Sequence[Template], gateway: EmbeddingGateway,
                 mode: Union[str, EmbeddingMode] = EmbeddingMode.DIRECT,
                 metric: Union[str, Metric] = Metric.IP,
                 nlist: Optional[int] = None, seed: int = 42):
        self.templates = list(templates)
        self.by_id = {t.id: t for t in self.templates}
        self.gateway = gateway
        self.mode = EmbeddingMode.parse(mode)
        self.metric = Metric.parse(metric)
        self.seed = seed
        self._index: Optional[IvfFlatIndex] = None
        if self.templates:
            items = [(t.id, template_vector(t, self.mode, gateway)) for t in self.templates]
            self._index = build_index(items, nlist=nlist, metric=self.metric, seed=seed)

    def __len__(self) -> int:
        return len(self.templates)

    @property
    def index(self) -> IvfFlatIndex:
        if self._index is None:
            raise StateError("no template index built; load a corpus and rebuild first")
        return self._index

    def retrieve(self, question: str, n: int = 2,
                 nprobe: Optional[int] = None) -> list[tuple[Template, float]]:
        if n < 1:
            raise InputError("n must be >= 1")
        index = self.index
        query = embed_text(question, self.gateway)
        # corpus-scale stores default to exact search; nprobe trims it when set
        nprobe = index.nlist if nprobe is None else nprobe
        hits = index.search(query, k=n, nprobe=nprobe)
        return [(self.by_id[item_id], score) for item_id, score in hits]


def retrieve_templates(store: Optional[TemplateStore], question: str, n: int = 2,
                       nprobe: Optional[int] = None) -> list[tuple[Template, float]]:
    if store is None or len(store) == 0:
        raise StateError("no template index available; index a corpus first")
    return store.retrieve(question, n=n, nprobe=nprobe)


# ---------------------------------------------------------------------------
# Retrieval evaluation metrics

@dataclass
class RetrievalRecord:
    question: str
    true_target: str
    retrieved: list[tuple[str, str, float]]  # (template id, target, score), best first

    def __post_init__(self):
        if not self.retrieved:
            raise InputError("a retrieval record needs at least one retrieved item")


def retrieval_accuracy(records: Sequence[RetrievalRecord]) -> float:
    """Micro accuracy: every retrieved item counts as TP or FP by target match."""
    if not records:
        raise UndefinedMetricError("retrieval accuracy is undefined over zero records")
    tp = fp = 0
    for record in records:
        for _, target, _ in record.retrieved:
            if target == record.true_target:
                tp += 1
            else:
                fp += 1
    return tp / (tp + fp)


def multiclass_mcc(confusion: Union[Sequence[Sequence[int]], np.ndarray]) -> float:
    """Matthews correlation over a square confusion matrix (rows = true class).

    Exact integer arithmetic up to the final division; returns 0 when either
    variance factor vanishes (e.g. a constant predictor).
    """
    matrix = np.asarray(confusion)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"confusion matrix must be square, got shape {matrix.shape}")
    if matrix.size == 0:
        raise InputError("confusion matrix must be non-empty")
    if np.any(matrix < 0):
        raise InputError("confusion matrix entries must be non-negative")
    if not np.issubdtype(matrix.dtype, np.integer):
        if not np.all(matrix == np.round(matrix)):
            raise InputError("confusion matrix entries must be integers")
        matrix = matrix.astype(np.int64)

    cells = [[int(x) for x in row] for row in matrix]
    s = sum(sum(row) for row in cells)
    if s == 0:
        raise InputError("confusion matrix total must be positive")
    c = sum(cells[i][i] for i in range(len(cells)))
    t = [sum(row) for row in cells]                       # true-class totals
    p = [sum(row[j] for row in cells) for j in range(len(cells))]  # predicted totals

    numerator = c * s - sum(pk * tk for pk, tk in zip(p, t))
    f1 = s * s - sum(pk * pk for pk in p)
    f2 = s * s - sum(tk * tk for tk in t)
    if f1 == 0 or f2 == 0:
        return 0.0
    return numerator / float(np.sqrt(float(f1) * float(f2)))


class ConfusionLevel(str, Enum):
    CLASS = "class"
    TARGET = "target"


def _class_of_target(target: str) -> str:
    return target.split(TARGET_SEPARATOR, 1)[0]


def build_confusion(records: Sequence[RetrievalRecord],
                    level: Union[str, ConfusionLevel] = ConfusionLevel.CLASS
                    ) -> tuple[np.ndarray, list[str]]:
    """Top-1 confusion matrix; labels sorted lexicographically, rows = true label."""
    if not records:
        raise InputError("cannot build a confusion matrix over zero records")
    level = ConfusionLevel(level) if not isinstance(level, ConfusionLevel) else level
    pairs = []
    for record in records:
        top_target = record.retrieved[0][1]
        if level is ConfusionLevel.CLASS:
            pairs.append((_class_of_target(record.true_target), _class_of_target(top_target)))
        else:
            pairs.append((record.true_target, top_target))
    labels = sorted({a for a, _ in pairs} | {b for _, b in pairs})
    pos = {label: i for i, label in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for true, predicted in pairs:
        matrix[pos[true], pos[predicted]] += 1
    return matrix, labels
