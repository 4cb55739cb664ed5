"""Command-line interface.

Exit codes: 0 success (errored samples allowed), 1 configuration, dataset
or I/O failure, 2 when a task produced no successful prediction or there
was nothing to score.
"""

import asyncio
import time
from pathlib import Path
from typing import Annotated

import typer
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from lalmeval.config.loader import load_config
from lalmeval.core.logging import configure_logging
from lalmeval.domain.errors import LalmevalError
from lalmeval.domain.models import CATEGORIES, MockBehavior, RunConfig
from lalmeval.engine.orchestrator import (
    failed_tasks,
    load_task_samples,
    replay_scores,
    run_evaluation,
    select_tasks,
)
from lalmeval.mocklalm.server import serve
from lalmeval.report.writer import load_results, write_outputs

EXIT_FAILURE = 1
EXIT_NO_PREDICTIONS = 2

app = typer.Typer(name="lalmeval", help="Evaluate audio-capable LLM endpoints.", no_args_is_help=True)
console = Console()
err_console = Console(stderr=True, soft_wrap=True)

ConfigOption = Annotated[Path, typer.Option("--config", "-c", help="Run configuration (YAML).")]
CategoryOption = Annotated[
    list[str] | None, typer.Option("--category", help="Restrict to a task category; repeatable.")
]
OutputOption = Annotated[Path | None, typer.Option("--output", "-o", help="Output directory.")]


@app.callback()
def main(
    verbose: Annotated[int, typer.Option("--verbose", "-v", count=True, help="Debug logging.")] = 0,
    quiet: Annotated[bool, typer.Option("--quiet", "-q", help="Only log errors.")] = False,
) -> None:
    """Evaluate audio-capable LLM endpoints."""
    level = "ERROR" if quiet else ("DEBUG" if verbose else None)
    configure_logging(level=level)


def _fail(message: str, code: int = EXIT_FAILURE) -> typer.Exit:
    err_console.print(f"[red]error:[/red] {escape(message)}", highlight=False)
    return typer.Exit(code)


def _check_categories(categories: list[str] | None) -> None:
    unknown = [c for c in categories or [] if c not in CATEGORIES]
    if unknown:
        raise _fail(f"unknown category {unknown[0]!r}; valid categories: {', '.join(CATEGORIES)}")


def _load(config_path: Path) -> RunConfig:
    try:
        return load_config(config_path)
    except LalmevalError as e:
        raise _fail(e.message) from e


@app.command()
def run(config: ConfigOption, output: OutputOption = None, category: CategoryOption = None) -> None:
    """Run inference, scoring and reporting for every configured task."""
    _check_categories(category)
    run_config = _load(config)
    started = time.monotonic()
    try:
        report = asyncio.run(run_evaluation(run_config, config.parent, category))
        written = write_outputs(report, output or Path(run_config.output_dir))
    except LalmevalError as e:
        raise _fail(e.message) from e

    for path in written:
        console.print(f"wrote {path}", highlight=False)
    console.print(f"{len(report.per_sample)} sample results in {time.monotonic() - started:.1f}s", highlight=False)
    failed = failed_tasks(report, [t.task_name for t in select_tasks(run_config, category)])
    if failed:
        raise _fail(f"no successful predictions for task(s): {', '.join(failed)}", EXIT_NO_PREDICTIONS)


@app.command()
def score(
    predictions: Annotated[Path, typer.Option("--predictions", "-p", help="Stored results.jsonl.")],
    config: ConfigOption,
    output: OutputOption = None,
) -> None:
    """Recompute metrics and the report from stored predictions."""
    run_config = _load(config)
    try:
        results = load_results(predictions)
        if not results:
            raise _fail(f"no predictions in {predictions}", EXIT_NO_PREDICTIONS)
        report = asyncio.run(replay_scores(run_config, results))
        written = write_outputs(report, output or Path(run_config.output_dir))
    except LalmevalError as e:
        raise _fail(e.message) from e
    for path in written:
        console.print(f"wrote {path}", highlight=False)


@app.command("list-tasks")
def list_tasks(config: ConfigOption, category: CategoryOption = None) -> None:
    """Show the configured tasks with their dataset sizes."""
    _check_categories(category)
    run_config = _load(config)
    table = Table(title="Tasks")
    for column in ("task", "category", "samples", "metrics"):
        table.add_column(column)
    for task in select_tasks(run_config, category):
        try:
            size = str(len(load_task_samples(task, run_config, config.parent)))
        except LalmevalError as e:
            raise _fail(f"{task.task_name}: {e.message}") from e
        table.add_row(task.task_name, task.category, size, ", ".join(task.metric_names))
    console.print(table)


@app.command("mock-serve")
def mock_serve(
    port: Annotated[int, typer.Option("--port", help="TCP port; 0 picks a free one.")] = 8000,
    behavior: Annotated[Path | None, typer.Option("--behavior", help="Mock behavior file (YAML or JSON).")] = None,
    host: Annotated[str | None, typer.Option("--host", help="Interface to bind.")] = None,
) -> None:
    """Serve a scripted chat-completions mock until interrupted."""
    try:
        data = yaml.safe_load(behavior.read_text(encoding="utf-8")) if behavior else {}
        spec = MockBehavior.model_validate(data or {})
    except (OSError, yaml.YAMLError) as e:
        raise _fail(f"cannot read behavior file: {e}") from e
    except ValidationError as e:
        raise _fail(f"invalid behavior: {e.errors()[0]['msg']}") from e

    try:
        handle = serve(spec, port=port, host=host)
    except LalmevalError as e:
        raise _fail(e.message) from e
    console.print(f"mock endpoint at {handle.base_url} (Ctrl+C to stop)", highlight=False)
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        pass
    finally:
        handle.close()
