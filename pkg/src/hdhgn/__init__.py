"""Code classification with heterogeneous directed hypergraph networks over ASTs."""

__version__ = "0.1.0"
