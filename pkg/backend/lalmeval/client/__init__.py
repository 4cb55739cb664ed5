"""Chat-completions client for audio-capable endpoints."""
