"""Numerics laboratory for oscillatory integral operators of Bochner-Riesz type."""
__version__ = "0.1.0"
