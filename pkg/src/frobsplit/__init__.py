"""Exact desk-scale checks of Frobenius splitting sections and parabolic weight data."""
from frobsplit.kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
