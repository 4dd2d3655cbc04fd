"""Quadrature and Monte Carlo evaluation of the Hartman-Watson density and related laws."""

__version__ = "0.1.0"
