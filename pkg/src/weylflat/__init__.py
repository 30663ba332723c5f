"""Periodic maximal flats of SL(d, Z) \\ SL(d, R): geometry, enumeration and experiments."""

__version__ = "0.1.0"
