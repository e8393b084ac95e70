"""Exact Hecke eigenforms and their restricted mass on the vertical geodesic.

The package builds holomorphic cusp forms for the full modular group from
integer q-expansions, extracts Hecke eigenforms, and evaluates the harmonic
weight, the restricted mass of |f|^2 along x = 0, shifted-sum approximations
to that mass, Petersson/Kuznetsov style averages, and the quantum variance
pipeline that combines all of the above.  Everything numerical is backed by
a second route or an exact identity somewhere in the test suite.
"""

__version__ = "0.1.0"
