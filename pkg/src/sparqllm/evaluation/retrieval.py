"""Retrieval evaluation harness: accuracy/MCC grids over similarity metrics,
embedding modes and retrieved-template counts, plus the class confusion matrix.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

from ..embeddings import EmbeddingGateway
from ..errors import InputError
from ..ivf import Metric
from ..templates import (
    ConfusionLevel,
    EmbeddingMode,
    RetrievalRecord,
    Template,
    TemplateStore,
    build_confusion,
    multiclass_mcc,
    retrieval_accuracy,
)

logger = logging.getLogger(__name__)

DEFAULT_N_SWEEP = (1, 2, 5, 7, 10)


@dataclass
class RetrievalSample:
    question: str
    query: str
    cls: str
    entity: str
    target: str


_REQUIRED_COLUMNS = ("Question", "Query", "Class", "Entity", "Target")


def load_retrieval_dataset(source: Union[str, Path]) -> list[RetrievalSample]:
    """CSV with header columns Question, Query, Class, Entity, Target."""
    with open(source, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [c for c in _REQUIRED_COLUMNS if c not in fields]
        if missing:
            raise InputError(f"retrieval dataset is missing columns: {', '.join(missing)}")
        samples = []
        for lineno, row in enumerate(reader, start=2):
            sample = RetrievalSample(
                question=row["Question"].strip(),
                query=row["Query"].strip(),
                cls=row["Class"].strip(),
                entity=row["Entity"].strip(),
                target=row["Target"].strip(),
            )
            if not sample.question:
                raise InputError(f"line {lineno}: empty Question")
            expected_target = f"{sample.cls}|{sample.entity}"
            if sample.target != expected_target:
                raise InputError(
                    f"line {lineno}: Target {sample.target!r} does not equal "
                    f"Class|Entity {expected_target!r}"
                )
            samples.append(sample)
    if not samples:
        raise InputError("retrieval dataset has no samples")
    return samples


def collect_records(store: TemplateStore, samples: Sequence[RetrievalSample],
                    n: int) -> list[RetrievalRecord]:
    records = []
    for sample in samples:
        hits = store.retrieve(sample.question, n=n)
        records.append(RetrievalRecord(
            question=sample.question,
            true_target=sample.target,
            retrieved=[(t.id, t.target, score) for t, score in hits],
        ))
    return records


def _scores(records: list[RetrievalRecord]) -> dict:
    matrix, _ = build_confusion(records, ConfusionLevel.TARGET)
    return {"accuracy": retrieval_accuracy(records), "mcc": multiclass_mcc(matrix)}


def run_retrieval_sweep(templates: Sequence[Template], samples: Sequence[RetrievalSample],
                        gateway: EmbeddingGateway, mode: Union[str, EmbeddingMode] = "direct",
                        metric: Union[str, Metric] = "ip", n_values: Sequence[int] = DEFAULT_N_SWEEP,
                        n_default: int = 2, seed: int = 42) -> dict:
    """Three grids (similarity metric, embedding mode, template count) plus the
    top-1 class confusion matrix at the pinned configuration."""
    mode = EmbeddingMode.parse(mode)
    metric = Metric.parse(metric)

    def store_for(m: EmbeddingMode, met: Metric) -> TemplateStore:
        return TemplateStore(templates, gateway, mode=m, metric=met, seed=seed)

    metric_grid = []
    for met in (Metric.COSINE, Metric.IP, Metric.L2):
        records = collect_records(store_for(mode, met), samples, n_default)
        metric_grid.append({"metric": met.value, **_scores(records)})

    describable = all(t.description.strip() for t in templates)
    mode_grid = []
    for m in (EmbeddingMode.DIRECT, EmbeddingMode.DESCRIPTION, EmbeddingMode.COMBINED):
        if m is not EmbeddingMode.DIRECT and not describable:
            mode_grid.append({"mode": m.value, "accuracy": None, "mcc": None,
                              "note": "corpus has templates without descriptions"})
            continue
        records = collect_records(store_for(m, metric), samples, n_default)
        mode_grid.append({"mode": m.value, **_scores(records)})

    primary_store = store_for(mode, metric)
    n_grid = []
    for n in n_values:
        records = collect_records(primary_store, samples, n)
        n_grid.append({"n": n, **_scores(records)})

    confusion_records = collect_records(primary_store, samples, n_default)
    matrix, labels = build_confusion(confusion_records, ConfusionLevel.CLASS)

    return {
        "samples": len(samples),
        "templates": len(templates),
        "mode": mode.value,
        "metric": metric.value,
        "n_default": n_default,
        "seed": seed,
        "metric_grid": metric_grid,
        "mode_grid": mode_grid,
        "n_grid": n_grid,
        "confusion": {"labels": labels, "matrix": matrix.tolist()},
    }


def render_sweep_text(report: dict) -> str:
    def fmt(value) -> str:
        return " n/a" if value is None else f"{value:.2f}"

    lines = [f"retrieval evaluation: {report['samples']} questions over "
             f"{report['templates']} templates "
             f"(mode={report['mode']}, metric={report['metric']}, n={report['n_default']})", ""]
    lines.append(f"{'similarity metric':<20} {'Accuracy':>9} {'MCC':>7}")
    for row in report["metric_grid"]:
        lines.append(f"{row['metric']:<20} {fmt(row['accuracy']):>9} {fmt(row['mcc']):>7}")
    lines.append("")
    lines.append(f"{'embedding mode':<20} {'Accuracy':>9} {'MCC':>7}")
    for row in report["mode_grid"]:
        lines.append(f"{row['mode']:<20} {fmt(row['accuracy']):>9} {fmt(row['mcc']):>7}")
    lines.append("")
    lines.append(f"{'templates retrieved':<20} {'Accuracy':>9} {'MCC':>7}")
    for row in report["n_grid"]:
        label = f"{row['n']} template" + ("s" if row["n"] != 1 else "")
        lines.append(f"{label:<20} {fmt(row['accuracy']):>9} {fmt(row['mcc']):>7}")
    lines.append("")
    labels = report["confusion"]["labels"]
    matrix = report["confusion"]["matrix"]
    width = max((len(l) for l in labels), default=5) + 2
    lines.append("top-1 class confusion (rows = true):")
    lines.append(" " * width + "".join(f"{l:>{width}}" for l in labels))
    for label, row in zip(labels, matrix):
        lines.append(f"{label:>{width}}" + "".join(f"{v:>{width}}" for v in row))
    return "\n".join(lines)


def save_sweep_json(report: dict, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(report, sort_keys=True, indent=2), encoding="utf-8")
