"""Verification lab for higher-order Szego limit theorems on the circle."""

__version__ = "0.1.0"
