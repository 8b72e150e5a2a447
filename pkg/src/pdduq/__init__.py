"""Polynomial dimensional decomposition for uncertainty quantification and design sensitivity."""

__version__ = "0.1.0"
