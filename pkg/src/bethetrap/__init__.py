"""Bound Bethe-ansatz states of repulsive bosons in a 1D finite square well."""

__version__ = "0.1.0"
