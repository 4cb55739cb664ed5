"""lalmeval test suite."""
