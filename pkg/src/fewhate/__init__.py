"""Few-shot hate-speech experiment harness."""

__version__ = "0.1.0"
