"""Holonomy decomposition of the spatial prisoner's dilemma semigroup."""

__version__ = "0.1.0"
