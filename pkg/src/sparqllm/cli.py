"""Command-line entry point: ETL, indexing, asking, serving, and the three
evaluation harnesses.

Exit codes: 0 success, 1 usage error (bad flags, missing files), 2 pipeline or
evaluation failure.  ``--format json`` prints parseable JSON on stdout;
diagnostics go to stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .embeddings import MockEmbeddingGateway
from .errors import SparqllmError
from .evaluation import (
    load_generation_dataset,
    load_retrieval_dataset,
    load_viz_dataset,
    run_generation_eval,
    run_retrieval_sweep,
    run_viz_eval,
)
from .evaluation.retrieval import DEFAULT_N_SWEEP, render_sweep_text
from .evaluation.viz import render_viz_text
from .generation import (
    GenerationConfig,
    GenerationExhausted,
    HttpLlmGateway,
    QueryGenerator,
    ScriptedLlmGateway,
)
from .ivf import IvfFlatIndex
from .kg import SparqlHttpClient, apply_mapping, check_placeholders, clean_rows, load_mapping, read_csv
from .kg.cleaning import load_cleaning_rules
from .kg.ontology import OntologySchema, load_ontology
from .service.config import ServiceConfig
from .sparql import EMBEDDED_ENDPOINT_URL, EmbeddedSparqlTransport, MemoryTripleStore
from .templates import TemplateStore, load_templates
from .viz import PLOT, decide_representation, plan_chart, render_table_text, summarize_results


class PipelineFailure(SparqllmError):
    """Raised by commands to signal exit code 2."""


@click.group()
@click.option("--seed", default=42, show_default=True, help="Seed for k-means and mock embeddings.")
@click.pass_context
def cli(ctx, seed: int):
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed


def _base_config(seed: int) -> ServiceConfig:
    config = ServiceConfig.from_env()
    config.seed = seed
    return config


def _sparql_client(endpoint: str, timeout: float, etl: tuple = ()) -> SparqlHttpClient:
    if endpoint == "embedded":
        store = MemoryTripleStore()
        client = SparqlHttpClient(EMBEDDED_ENDPOINT_URL, timeout=timeout,
                                  transport=EmbeddedSparqlTransport(store))
    else:
        client = SparqlHttpClient(endpoint, timeout=timeout)
    for csv_path, mapping_path in etl:
        rows = read_csv(csv_path)
        mapping = load_mapping(mapping_path)
        check_placeholders(rows, mapping)
        client.insert_triples(apply_mapping(rows, mapping))
    return client


def _template_store(corpus: Optional[str], config: ServiceConfig) -> Optional[TemplateStore]:
    path = corpus or config.templates
    if not path:
        return None
    gateway = MockEmbeddingGateway(dim=config.embed_dim, seed=config.seed)
    return TemplateStore(load_templates(path), gateway, mode=config.mode,
                         metric=config.metric, seed=config.seed)


def _llm_gateway(replay: Optional[str], config: ServiceConfig):
    if replay:
        return ScriptedLlmGateway.from_file(replay)
    if config.mock_replay:
        return ScriptedLlmGateway.from_file(config.mock_replay)
    if config.llm_url:
        return HttpLlmGateway(config.llm_url, config.llm_model,
                              temperature=config.temperature, timeout=config.llm_timeout)
    raise click.UsageError("no LLM configured: pass --replay or set SPARQLLM_LLM_URL")


# ---------------------------------------------------------------------------
# etl

@cli.group()
def etl():
    """Build the knowledge graph from tabular data."""


@etl.command("run")
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mapping", "mapping_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--cleaning", "cleaning_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--endpoint", default=None, help="SPARQL endpoint URL (default from env).")
@click.pass_context
def etl_run(ctx, csv_path, mapping_path, cleaning_path, endpoint):
    """Clean, map and load a CSV into the triplestore."""
    config = _base_config(ctx.obj["seed"])
    endpoint = endpoint or config.sparql_endpoint
    try:
        rows = read_csv(csv_path)
        mapping = load_mapping(mapping_path)
        if cleaning_path:
            rules = load_cleaning_rules(json.loads(Path(cleaning_path).read_text(encoding="utf-8")))
            rows, report = clean_rows(rows, rules)
            for issue in report.issues:
                click.echo(f"cleaning: row {issue.row} column {issue.column}: {issue.reason}", err=True)
        check_placeholders(rows, mapping)
        triples = apply_mapping(rows, mapping)
        client = _sparql_client(endpoint, config.sparql_timeout)
        load = client.insert_triples(triples) if triples else None
        total = client.count_triples()
        client.close()
    except SparqllmError as exc:
        raise PipelineFailure(f"etl failed: {exc}") from exc
    click.echo(f"inserted {load.inserted if load else 0} triples "
               f"({len(rows.rows)} rows x {len(mapping)} rules); store now holds {total}")


# ---------------------------------------------------------------------------
# ask

@cli.command()
@click.argument("question")
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), help="Template corpus JSONL.")
@click.option("--ontology", "ontology_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--endpoint", default=None, help="SPARQL endpoint URL or 'embedded'.")
@click.option("--replay", type=click.Path(exists=True, dir_okay=False), help="Scripted LLM replay file.")
@click.option("--etl", "etl_pairs", nargs=2, multiple=True, metavar="CSV MAPPING",
              help="Load CSV+mapping into the (embedded) store before asking; repeatable.")
@click.option("--n-templates", type=int, default=None)
@click.option("--metric", type=click.Choice(["cosine", "ip", "l2"]), default=None)
@click.option("--mode", type=click.Choice(["direct", "description", "combined"]), default=None)
@click.option("--max-attempts", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.pass_context
def ask(ctx, question, corpus, ontology_path, endpoint, replay, etl_pairs,
        n_templates, metric, mode, max_attempts, fmt):
    """Run the full question-to-results pipeline once."""
    config = _base_config(ctx.obj["seed"])
    if metric:
        config.metric = metric
    if mode:
        config.mode = mode
    if n_templates:
        config.n_templates = n_templates
    if max_attempts:
        config.max_attempts = max_attempts

    store = _template_store(corpus, config)
    if store is None or len(store) == 0:
        raise click.UsageError("no template corpus: pass --corpus or set SPARQLLM_TEMPLATES")
    ontology = load_ontology(ontology_path or config.ontology) if (ontology_path or config.ontology) \
        else OntologySchema()
    client = _sparql_client(endpoint or config.sparql_endpoint, config.sparql_timeout, etl_pairs)
    llm = _llm_gateway(replay, config)

    generator = QueryGenerator(
        llm=llm, sparql=client, ontology_text=ontology.serialized_text, store=store,
        config=GenerationConfig(n_templates=config.n_templates, max_attempts=config.max_attempts),
    )
    try:
        results, trace = generator.generate(question)
    except GenerationExhausted as exc:
        click.echo(json.dumps(exc.trace.to_json(), indent=2), err=True)
        raise PipelineFailure(str(exc)) from exc
    except SparqllmError as exc:
        raise PipelineFailure(str(exc)) from exc

    summary = summarize_results(results)
    representation = decide_representation(question, trace.final_query or "", summary)
    chart = None
    if representation == PLOT:
        try:
            chart = plan_chart(question, trace.final_query or "", results, summary)
        except SparqllmError:
            representation = "TABLE"

    if fmt == "json":
        click.echo(json.dumps({
            "sparql": trace.final_query,
            "trace": trace.to_json(),
            "results": results.to_json(),
            "representation": representation,
            "chart_spec": chart.to_json() if chart else None,
            "summary": summary.to_json(),
        }, indent=2))
        return
    click.echo(f"SPARQL ({len(trace.attempts)} attempt(s)):", err=True)
    click.echo(trace.final_query or "", err=True)
    if representation == PLOT and chart is not None:
        click.echo("suggested visualization (render with the dashboard):", err=True)
        click.echo(json.dumps(chart.to_json(), indent=2))
    else:
        click.echo(render_table_text(results))


# ---------------------------------------------------------------------------
# eval

@cli.group("eval")
def eval_group():
    """Evaluation harnesses: retrieval, generation, viz."""


def _parse_n_values(raw: Optional[str]) -> tuple[int, ...]:
    if not raw:
        return DEFAULT_N_SWEEP
    try:
        if ".." in raw:
            lo, hi = raw.split("..", 1)
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(x) for x in raw.split(","))
    except ValueError:
        raise click.UsageError(f"cannot parse --n value {raw!r}; use e.g. '2', '1..10' or '1,2,5'")


@eval_group.command("retrieval")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["direct", "description", "combined"]), default="direct",
              show_default=True)
@click.option("--metric", type=click.Choice(["cosine", "ip", "l2"]), default="ip", show_default=True)
@click.option("--n", "n_values", default=None, help="Sweep values, e.g. '1,2,5,7,10' or '1..10'.")
@click.option("--n-default", type=int, default=2, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Also write the JSON report here.")
@click.pass_context
def eval_retrieval(ctx, dataset, corpus, mode, metric, n_values, n_default, fmt, out):
    """Accuracy/MCC grids over metrics, modes and template counts."""
    config = _base_config(ctx.obj["seed"])
    store = _template_store(corpus, config)
    if store is None:
        raise click.UsageError("no template corpus: pass --corpus or set SPARQLLM_TEMPLATES")
    try:
        samples = load_retrieval_dataset(dataset)
        report = run_retrieval_sweep(
            store.templates, samples, store.gateway, mode=mode, metric=metric,
            n_values=_parse_n_values(n_values), n_default=n_default, seed=config.seed,
        )
    except SparqllmError as exc:
        raise PipelineFailure(f"retrieval eval failed: {exc}") from exc
    if out:
        Path(out).write_text(json.dumps(report, sort_keys=True, indent=2), encoding="utf-8")
    if fmt == "json":
        click.echo(json.dumps(report, sort_keys=True, indent=2))
    else:
        click.echo(render_sweep_text(report))


@eval_group.command("generation")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--endpoint", default=None)
@click.option("--replay", type=click.Path(exists=True, dir_okay=False))
@click.option("--etl", "etl_pairs", nargs=2, multiple=True, metavar="CSV MAPPING")
@click.option("--no-templates", is_flag=True, help="Ablation: omit templates from prompts.")
@click.option("--n-templates", type=int, default=None)
@click.option("--mode", type=click.Choice(["direct", "description", "combined"]), default=None)
@click.option("--metric", type=click.Choice(["cosine", "ip", "l2"]), default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def eval_generation(ctx, dataset, corpus, ontology_path, endpoint, replay, etl_pairs,
                    no_templates, n_templates, mode, metric, fmt, out):
    """ESR/RCA/RMR/HRA with entity, class and complexity breakdowns."""
    config = _base_config(ctx.obj["seed"])
    if mode:
        config.mode = mode
    if metric:
        config.metric = metric
    if n_templates:
        config.n_templates = n_templates

    store = _template_store(corpus, config)
    if store is None and not no_templates:
        raise click.UsageError("no template corpus: pass --corpus, set SPARQLLM_TEMPLATES, "
                               "or run with --no-templates")
    ontology = load_ontology(ontology_path or config.ontology) if (ontology_path or config.ontology) \
        else OntologySchema()
    try:
        samples = load_generation_dataset(dataset)
        client = _sparql_client(endpoint or config.sparql_endpoint, config.sparql_timeout, etl_pairs)
        generator = QueryGenerator(
            llm=_llm_gateway(replay, config), sparql=client,
            ontology_text=ontology.serialized_text, store=store,
            config=GenerationConfig(n_templates=config.n_templates,
                                    max_attempts=config.max_attempts,
                                    use_templates=not no_templates),
        )
        report = run_generation_eval(samples, generator, config={
            "with_templates": not no_templates,
            "n_templates": config.n_templates,
            "max_attempts": config.max_attempts,
            "mode": config.mode,
            "metric": config.metric,
            "seed": config.seed,
        })
    except SparqllmError as exc:
        raise PipelineFailure(f"generation eval failed: {exc}") from exc
    if out:
        Path(out).write_text(report.to_json_text(), encoding="utf-8")
    if fmt == "json":
        click.echo(report.to_json_text())
    else:
        click.echo(report.render_text())


@eval_group.command("viz")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def eval_viz(dataset, fmt, out):
    """Plot-vs-table decision accuracy and the 2x2 confusion matrix."""
    try:
        samples = load_viz_dataset(dataset)
        report = run_viz_eval(samples)
    except SparqllmError as exc:
        raise PipelineFailure(f"viz eval failed: {exc}") from exc
    if out:
        Path(out).write_text(json.dumps(report, sort_keys=True, indent=2), encoding="utf-8")
    if fmt == "json":
        click.echo(json.dumps(report, sort_keys=True, indent=2))
    else:
        click.echo(render_viz_text(report))


# ---------------------------------------------------------------------------
# templates / index

@cli.group()
def templates():
    """Template corpus management."""


@templates.command("index")
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["direct", "description", "combined"]), default="direct",
              show_default=True)
@click.option("--metric", type=click.Choice(["cosine", "ip", "l2"]), default="ip", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Write the index snapshot here.")
@click.option("--query", default=None, help="Probe the fresh index with one question.")
@click.option("--k", type=int, default=2, show_default=True)
@click.pass_context
def templates_index(ctx, corpus, mode, metric, out, query, k):
    """Build (and optionally persist) the template index."""
    config = _base_config(ctx.obj["seed"])
    config.mode, config.metric = mode, metric
    try:
        store = _template_store(corpus, config)
        assert store is not None
    except SparqllmError as exc:
        raise PipelineFailure(f"indexing failed: {exc}") from exc
    click.echo(f"indexed {len(store)} templates "
               f"(mode={mode}, metric={metric}, nlist={store.index.nlist})")
    if out:
        store.index.save(out)
        click.echo(f"snapshot written to {out}", err=True)
    if query:
        for template, score in store.retrieve(query, n=k):
            click.echo(f"{score:.6f}  {template.id}  {template.target}")


@cli.group("index")
def index_group():
    """Index snapshot persistence."""


@index_group.command("save")
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--path", required=True, type=click.Path(dir_okay=False))
@click.option("--mode", type=click.Choice(["direct", "description", "combined"]), default="direct")
@click.option("--metric", type=click.Choice(["cosine", "ip", "l2"]), default="ip")
@click.pass_context
def index_save(ctx, corpus, path, mode, metric):
    """Build an index from a corpus and write the snapshot file."""
    config = _base_config(ctx.obj["seed"])
    config.mode, config.metric = mode, metric
    store = _template_store(corpus, config)
    assert store is not None
    store.index.save(path)
    click.echo(f"saved index over {len(store)} templates to {path}")


@index_group.command("load")
@click.option("--path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--query", default=None, help="Search the loaded snapshot with one question.")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--nprobe", type=int, default=None)
@click.pass_context
def index_load(ctx, path, query, k, nprobe):
    """Load a snapshot, report its shape, optionally run a probe search."""
    index = IvfFlatIndex.load(path)
    click.echo(f"loaded index: {len(index)} vectors, dim={index.dim}, "
               f"nlist={index.nlist}, metric={index.metric.value}")
    if query:
        gateway = MockEmbeddingGateway(dim=index.dim, seed=index.seed)
        for item_id, score in index.search(gateway.embed(query), k=k, nprobe=nprobe):
            click.echo(f"{score:.6f}  {item_id}")


# ---------------------------------------------------------------------------
# serve

@cli.command()
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              help="JSON config file overriding SPARQLLM_* env values.")
@click.pass_context
def serve(ctx, config_file):
    """Start the HTTP service."""
    import uvicorn

    from .service.app import create_app

    config = ServiceConfig.from_env(config_file=config_file)
    config.seed = ctx.obj["seed"]
    app = create_app(config)
    click.echo(f"listening on http://{config.host}:{config.port}", err=True)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except FileNotFoundError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except PipelineFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except SparqllmError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.Abort:
        return 1


if __name__ == "__main__":
    sys.exit(main())
