"""Coreference domain adaptation with mention-only annotations."""

__version__ = "0.1.0"
