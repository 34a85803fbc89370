"""Noise-robust classification via semantically amended label distributions."""

__version__ = "0.1.0"
