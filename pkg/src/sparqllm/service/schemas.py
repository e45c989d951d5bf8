"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class AskOverrides(BaseModel):
    n_templates: Optional[int] = Field(default=None, ge=1, le=50)
    max_attempts: Optional[int] = Field(default=None, ge=1, le=10)


class AskRequest(BaseModel):
    question: str = ""
    overrides: Optional[AskOverrides] = None


class AttemptModel(BaseModel):
    query: str
    validation: Optional[str] = None
    execution: Optional[str] = None
    duration: float = 0.0


class TraceModel(BaseModel):
    attempts: list[AttemptModel]
    outcome: str
    final_query: Optional[str] = None


class ColumnSummaryModel(BaseModel):
    name: str
    kind: str
    count: int
    distinct: int
    min: Optional[float] = None
    max: Optional[float] = None
    mean: Optional[float] = None
    stddev: Optional[float] = None


class SummaryModel(BaseModel):
    row_count: int
    columns: list[ColumnSummaryModel]


class ChartSpecModel(BaseModel):
    kind: str
    x: Optional[str] = None
    y: list[str] = Field(default_factory=list)
    title: str = ""
    x_label: str = ""
    y_label: str = ""


class AskResponse(BaseModel):
    sparql: str
    trace: TraceModel
    results: dict  # SPARQL results JSON document
    representation: str  # PLOT | TABLE
    chart_spec: Optional[ChartSpecModel] = None
    summary: SummaryModel


class TemplateModel(BaseModel):
    id: str
    class_: str = Field(alias="class")
    entity: str
    target: str
    sparql_text: str
    description: str = ""
    example_question: str = ""

    model_config = {"populate_by_name": True}


class TemplatesResponse(BaseModel):
    count: int
    templates: list[TemplateModel]


class TemplatesLoadResponse(BaseModel):
    loaded: int


class EtlRequest(BaseModel):
    csv_path: str
    mapping_path: str
    cleaning_path: Optional[str] = None


class EtlResponse(BaseModel):
    inserted: int
    failed: int
    cleaning_issues: int
    store_triples: int


class HealthResponse(BaseModel):
    status: str
    sparql_endpoint: str
    llm: str
    templates: int
    warnings: list[str] = Field(default_factory=list)


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: Optional[dict] = None
