// Wire types for the question-answering service API.

export type BindingCell = {
  type: "uri" | "literal" | "typed-literal" | "bnode";
  value: string;
  datatype?: string;
};

export type SparqlResults = {
  head: { vars: string[] };
  results: { bindings: Record<string, BindingCell>[] };
};

export type Attempt = {
  query: string;
  validation: string | null;
  execution: string | null;
  duration: number;
};

export type Trace = {
  attempts: Attempt[];
  outcome: "SUCCESS" | "EXHAUSTED";
  final_query: string | null;
};

export type ChartSpec = {
  kind: string;
  x: string | null;
  y: string[];
  title: string;
  x_label: string;
  y_label: string;
};

export type ColumnSummary = {
  name: string;
  kind: "numeric" | "categorical" | "temporal";
  count: number;
  distinct: number;
  min?: number | null;
  max?: number | null;
  mean?: number | null;
  stddev?: number | null;
};

export type DataSummary = {
  row_count: number;
  columns: ColumnSummary[];
};

export type AskResponse = {
  sparql: string;
  trace: Trace;
  results: SparqlResults;
  representation: "PLOT" | "TABLE";
  chart_spec: ChartSpec | null;
  summary: DataSummary;
};

export type ApiErrorBody = {
  code: string;
  message: string;
  detail?: { trace?: Trace; [key: string]: unknown } | null;
};

export type HealthResponse = {
  status: string;
  sparql_endpoint: string;
  llm: string;
  templates: number;
  warnings: string[];
};
