"""Maximal f-divergences, total-variation reversibility and qubit geometry."""

__version__ = "0.1.0"
