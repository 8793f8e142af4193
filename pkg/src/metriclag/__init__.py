"""Deformed (metric) derivatives and the variational calculus built on them."""

__version__ = "0.1.0"
