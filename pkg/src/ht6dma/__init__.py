"""Hierarchically tunable six-dimensional movable-antenna base station model."""

__version__ = "0.1.0"
