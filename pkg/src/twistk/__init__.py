"""Numerical laboratory for a twisted K-theory invariant of SU(2) maps.

Two independent routes to the same integer: a graded trace over the kernel
of a truncated supercharge (susy), and a Chern-character flux through a
sphere in the space of couplings (susy); plus the chart-collation invariant
of unitary-valued maps on a triangulated 3-sphere (mesh, gerbe).

Submodules import numpy-heavy machinery; this package init stays light so
the command-line entry point can configure threading first.
"""

__version__ = "1.0.0"

__all__ = ["affine", "fock", "gerbe", "linalg", "mesh", "susy", "__version__"]
