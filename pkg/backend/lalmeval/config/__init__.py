"""Run configuration: parsing, validation and setting resolution."""
