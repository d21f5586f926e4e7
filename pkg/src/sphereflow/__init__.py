"""Spectral toolkit for aggregation and aggregation-diffusion flows on spheres."""

__version__ = "0.1.0"
