"""Spectral laboratory for one-dimensional nonlinear dispersive equations.

Modules
-------
fieldkit
    grids, real fields, spectral operators and norms.
airy
    Airy group, quartic heat flow and dispersive blow-up data.
solvers
    time stepping for gKdV, quasilinear KdV, BBM, DP and Brinkman.
diagnostics
    cutoffs, psi-weights, half-line energies, jump and Hölder detectors.
flow
    characteristic curves and the multi-peakon ODE.
scenarios, cli
    declarative runs, artifacts and the acceptance suites.
"""
from ._version import __version__

__all__ = ["__version__"]
