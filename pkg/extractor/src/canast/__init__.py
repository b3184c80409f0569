"""Canonical-AST extraction front end for the code-classification pipeline."""

__version__ = "0.1.0"
