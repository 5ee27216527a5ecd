"""Self-hosted mood sensing: ingestion, prediction, and analytics."""

__version__ = "0.1.0"
