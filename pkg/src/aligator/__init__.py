"""Polynomial invariant generation for extended P-solvable loops."""

__version__ = "0.1.0"
