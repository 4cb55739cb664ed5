"""Report files: ``results.jsonl``, ``report.json`` and ``summary.md``."""

from pathlib import Path

from pydantic import ValidationError

from lalmeval.domain.errors import PredictionsSchemaError, ReportWriteError
from lalmeval.domain.models import AggregateTable, RunReport, SampleResult

RESULTS_FILE = "results.jsonl"
REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.md"


def _fmt(value: float | None, digits: int = 4) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def render_results(report: RunReport) -> str:
    """One JSON SampleResult per line."""
    return "".join(result.model_dump_json() + "\n" for result in report.per_sample)


def render_report(report: RunReport) -> str:
    """Full report as indented JSON."""
    return report.model_dump_json(indent=2) + "\n"


def _table(table: AggregateTable) -> list[str]:
    header = [*table.dimensions, "metric", "value", "scale", "samples", "errors"]
    lines = [
        f"### {' x '.join(table.dimensions)} ({table.reducer})",
        "",
        "| " + " | ".join(header) + " |",
        "|" + "---|" * len(header),
    ]
    for row in table.rows:
        cells = [row.key[d] for d in table.dimensions]
        cells += [row.metric_name, _fmt(row.value), row.scale, str(row.sample_count), str(row.errors)]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    return lines


def render_summary(report: RunReport) -> str:
    """Human-readable Markdown summary."""
    lines = [
        "# Evaluation summary",
        "",
        f"- config fingerprint: `{report.config_fingerprint}`",
        f"- seed: {report.seed}",
        f"- judge template: {report.judge_template_version}",
        f"- sample results: {len(report.per_sample)}",
        "",
        "## Scores",
        "",
    ]
    for table in report.aggregates:
        lines.extend(_table(table))

    lines += [
        "## Efficiency",
        "",
        "| task | model | samples | audio (s) | wall (s) | RTF | samples/s |",
        "|---|---|---|---|---|---|---|",
    ]
    for e in report.efficiency:
        lines.append(
            f"| {e.task_name} | {e.model_name} | {e.samples_processed} | {_fmt(e.total_audio_s, 2)} "
            f"| {_fmt(e.wall_clock_s, 2)} | {_fmt(e.rtf)} | {_fmt(e.samples_per_second, 2)} |"
        )
    lines.append("")

    if report.scenario is not None:
        s = report.scenario
        lines += [
            "## Runtime scenarios",
            "",
            "| scenario | wall (s) | RTF | samples/s |",
            "|---|---|---|---|",
            f"| sequential | {_fmt(s.sequential_s, 2)} | {_fmt(s.sequential.rtf)} "
            f"| {_fmt(s.sequential.samples_per_second, 2)} |",
            f"| parallel | {_fmt(s.parallel_s, 2)} | {_fmt(s.parallel.rtf)} "
            f"| {_fmt(s.parallel.samples_per_second, 2)} |",
            "",
        ]
    return "\n".join(lines)


def write_outputs(report: RunReport, directory: str | Path) -> list[Path]:
    """Write the three report files.

    Output is a pure function of the report, so identical reports produce
    byte-identical files.

    Args:
        report: Run report.
        directory: Output directory, created when missing.

    Returns:
        Paths written, in a fixed order.

    Raises:
        ReportWriteError: The directory or a file cannot be written.
    """
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportWriteError(str(out), str(e)) from e

    written: list[Path] = []
    for name, content in (
        (RESULTS_FILE, render_results(report)),
        (REPORT_FILE, render_report(report)),
        (SUMMARY_FILE, render_summary(report)),
    ):
        path = out / name
        try:
            with path.open("w", encoding="utf-8", newline="\n") as handle:
                handle.write(content)
        except OSError as e:
            raise ReportWriteError(str(path), str(e)) from e
        written.append(path)
    return written


def load_results(path: str | Path) -> list[SampleResult]:
    """Read a ``results.jsonl`` file.

    Raises:
        PredictionsSchemaError: Unreadable file or a line that is not a SampleResult.
    """
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise PredictionsSchemaError(f"Cannot read predictions '{source}': {e}") from e

    results: list[SampleResult] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            results.append(SampleResult.model_validate_json(raw))
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"]) or "line"
            raise PredictionsSchemaError(f"{source}:{line_no}: {where}: {first['msg']}") from e
    return results
