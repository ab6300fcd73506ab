"""Reflection ODEs, a graded conjugation algebra and crossed matrix invariants."""

__version__ = "0.1.0"
