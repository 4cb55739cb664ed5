"""Scoring: word-level, diarization, match, judge and efficiency metrics."""
