"""Visualization-decision evaluation: accuracy and the 2x2 plot/table confusion."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from ..errors import InputError
from ..generation import LlmGateway
from ..viz import DataSummary, PLOT, decide_representation

LABELS = ("plot", "table")


@dataclass
class VizSample:
    question: str
    query: str
    summary: DataSummary
    label: str  # plot | table

    def __post_init__(self):
        if self.label not in LABELS:
            raise InputError(f"label must be 'plot' or 'table', got {self.label!r}")


def load_viz_dataset(source: Union[str, Path]) -> list[VizSample]:
    """JSONL rows: question, optional query, summary (row_count + columns), label."""
    samples = []
    lines = Path(source).read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            samples.append(VizSample(
                question=doc["question"],
                query=doc.get("query", ""),
                summary=DataSummary.from_json(doc["summary"]),
                label=str(doc["label"]).lower(),
            ))
        except (KeyError, ValueError, InputError) as exc:
            raise InputError(f"viz dataset line {lineno}: {exc}") from exc
    if not samples:
        raise InputError("viz dataset has no samples")
    return samples


def run_viz_eval(samples: Sequence[VizSample], gateway: Optional[LlmGateway] = None) -> dict:
    """Predict plot-vs-table per sample; returns accuracy plus the 2x2 matrix
    (rows = true label, columns = predicted, order plot/table)."""
    matrix = [[0, 0], [0, 0]]
    predictions = []
    for sample in samples:
        decided = decide_representation(sample.question, sample.query, sample.summary, gateway)
        predicted = "plot" if decided == PLOT else "table"
        predictions.append(predicted)
        matrix[LABELS.index(sample.label)][LABELS.index(predicted)] += 1
    correct = matrix[0][0] + matrix[1][1]
    return {
        "samples": len(samples),
        "accuracy": correct / len(samples),
        "labels": list(LABELS),
        "matrix": matrix,
        "predictions": predictions,
    }


def render_viz_text(report: dict) -> str:
    lines = [f"visualization decision: {report['samples']} samples, "
             f"accuracy {100.0 * report['accuracy']:.1f}%", ""]
    labels = report["labels"]
    width = max(len(l) for l in labels) + 4
    lines.append("confusion (rows = true):")
    lines.append(" " * width + "".join(f"{l:>{width}}" for l in labels))
    for label, row in zip(labels, report["matrix"]):
        lines.append(f"{label:>{width}}" + "".join(f"{v:>{width}}" for v in row))
    return "\n".join(lines)
