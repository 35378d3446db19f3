"""Sampled checks of regularity properties of set-valued maps on finite grids."""

__version__ = "0.1.0"
