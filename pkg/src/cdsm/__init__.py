"""Sensorimotor context discovery with hierarchical spectral transition models."""

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
