"""Concurrent engines and whole-run orchestration."""
