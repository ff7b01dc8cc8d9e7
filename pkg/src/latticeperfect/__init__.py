"""Perfect colorings of regular lattices and the stationary solutions they carry."""

__version__ = "0.1.0"
