"""Offline figure rendering for gpcons CSV/JSON artifacts."""

__version__ = "0.1.0"
