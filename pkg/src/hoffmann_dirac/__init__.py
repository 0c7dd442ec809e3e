"""Dirac bound states on static electrovacuum backgrounds sourced by a
nonlinear-electrodynamics point charge.

Modules
-------
nled       vacuum laws zeta, admissibility checks, model constants
spacetime  background profiles f^2, v, x(r)
channel    per-kappa coefficient matrix and decay diagnostics
prufer     Prufer shooting, eigenvalue counting and center probes
spectrum   eigenvalue search, Coulomb oracle, clustering statistics
cli        command-line interface
"""
from .channel import ChannelSpec
from .nled import born_infeld, check_admissibility, compute_constants, maxwell
from .spacetime import (DimensionlessParameters, GridConfig, PhysicalParameters,
                        build_profile, derive_parameters, dimensionless_parameters)
from .spectrum import coulomb_oracle, find_eigenvalue, scan_spectrum

__all__ = ["ChannelSpec", "born_infeld", "maxwell", "check_admissibility",
           "compute_constants", "DimensionlessParameters", "GridConfig",
           "PhysicalParameters", "build_profile", "derive_parameters",
           "dimensionless_parameters", "coulomb_oracle", "find_eigenvalue", "scan_spectrum"]
