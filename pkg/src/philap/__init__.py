"""Variational numerics for periodic phi-Laplacian differential inclusions."""

__version__ = "0.1.0"
