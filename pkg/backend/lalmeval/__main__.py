"""Allow ``python -m lalmeval``."""

from lalmeval.cli.main import app

app()
