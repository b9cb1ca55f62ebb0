"""Geodesic and horocycle flows on finite-area hyperbolic surfaces."""

__version__ = "0.1.0"
