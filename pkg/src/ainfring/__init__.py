"""A-infinity structures on extended homogeneous coordinate rings."""

__version__ = "0.1.0"
