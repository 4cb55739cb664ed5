"""Aggregation and run report outputs."""
