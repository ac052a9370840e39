"""Traveling free-boundary solutions of the (1+3)-D two-phase Stefan problem."""

__version__ = "0.1.0"
