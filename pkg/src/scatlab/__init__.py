"""scatlab: a desk-scale laboratory for semiclassical scattering.

Computes the scattering matrix of a compactly supported potential in the
plane by two independent backends (partial waves, Lippmann-Schwinger),
extracts its eigenphase spectrum, and runs the associated classical
scattering dynamics with Monte-Carlo phase-space volume estimators, so
that eigenphase equidistribution, the trace identity and the counting
bounds can be checked numerically over grids of the semiclassical
parameter h.
"""

__version__ = "0.1.0"

TOOL_NAME = "scatlab"
