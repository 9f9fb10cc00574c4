"""GPAC - graph probability aggregation clustering."""

__version__ = "0.1.0"
