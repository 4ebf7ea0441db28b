"""Credible-compilation middle end: TAC IR, optimization passes and certificate checking."""

__version__ = "0.1.0"
