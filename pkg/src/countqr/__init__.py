"""Quantile regression for count data via continuous count distributions."""

__version__ = "0.1.0"
