"""Tiny CPU-friendly sequence-to-sequence trainer and batch-generation adapter."""

__version__ = "0.1.0"
