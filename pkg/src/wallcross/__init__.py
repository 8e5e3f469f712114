"""Exact wall-crossing difference-term calculator for b+ = 1 four-manifolds."""

__version__ = "0.1.0"
