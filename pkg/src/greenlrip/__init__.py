"""Bi-objective green location-routing-inventory optimization."""

__version__ = "0.1.0"
