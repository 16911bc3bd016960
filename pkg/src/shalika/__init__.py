"""Exact computations with p-adic matrix groups, Gauss sums and pre-Shalika forms."""

__version__ = "0.1.0"
