"""Docking as maximum weighted independent set on emulated Rydberg atom arrays."""

__version__ = "0.1.0"
