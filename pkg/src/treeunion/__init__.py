"""Unions of uniform spanning trees: Poisson overlap, moment tails and LIL experiments."""

__version__ = "0.1.0"
