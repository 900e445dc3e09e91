"""Penalized regression paths with unbiased degrees-of-freedom estimates."""
__version__ = "0.1.0"
