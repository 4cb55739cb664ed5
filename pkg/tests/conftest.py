"""Shared fixtures: running mock endpoints and an evaluation workspace."""

from collections.abc import Iterator
from pathlib import Path

import pytest

from lalmeval.domain.models import MockBehavior
from lalmeval.mocklalm.server import MockServerHandle, serve
from tests.factories import config_yaml, manifest_line, write_manifest


@pytest.fixture
def echo_server() -> Iterator[MockServerHandle]:
    """Instant echo mock on an ephemeral port."""
    with serve(MockBehavior()) as handle:
        yield handle


@pytest.fixture
def failing_server() -> Iterator[MockServerHandle]:
    """Mock answering every request with HTTP 500."""
    with serve(MockBehavior(fail_prob=1.0)) as handle:
        yield handle


def _workspace(directory: Path, base_url: str) -> Path:
    write_manifest(
        directory / "asr.jsonl",
        [
            manifest_line("a1", "the cat sat", "the cat sat"),
            manifest_line("a2", "the cat sat on", "the cat sat"),
            manifest_line("a3", "hello world", "hello there world"),
        ],
    )
    write_manifest(
        directory / "sql.jsonl",
        [
            manifest_line("q1", "SELECT  *", "select *", kind="structured"),
            manifest_line("q2", "SELECT a", "SELECT b", kind="structured"),
        ],
    )
    config = directory / "run.yaml"
    config.write_text(config_yaml(base_url), encoding="utf-8")
    return config


@pytest.fixture
def run_config_path(tmp_path: Path, echo_server: MockServerHandle) -> Path:
    """Config and manifests of a two-task run against the echo mock."""
    return _workspace(tmp_path, echo_server.base_url)


@pytest.fixture
def failing_config_path(tmp_path: Path, failing_server: MockServerHandle) -> Path:
    """Same run against a mock that always fails."""
    return _workspace(tmp_path, failing_server.base_url)
