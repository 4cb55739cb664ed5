"""Concurrent evaluation harness for audio-capable LLM endpoints."""

__version__ = "0.1.0"
