"""Conformal reflecting surfaces on vehicles: phase design, scattered
fields and Monte Carlo V2V blockage studies."""

__version__ = "0.1.0"
