"""Champagne subdomains: constructions of unavoidable bubble sets with small
weighted capacity, plus exact kernels and walk-on-spheres verification."""

__version__ = "0.1.0"

from .kernels import (
    GaugeSet,
    GaugeSpec,
    annulus_hit_exact,
    capacity_phi,
    equilibrium_potential_sigma,
    kernel_N,
)

__all__ = [
    "GaugeSet",
    "GaugeSpec",
    "annulus_hit_exact",
    "capacity_phi",
    "equilibrium_potential_sigma",
    "kernel_N",
    "__version__",
]
