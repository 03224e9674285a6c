"""Quantum side: scattering matrices in the angular Fourier basis (d = 2).

Two independent backends produce the same unitary object: a diagonal
partial-wave matrix for rotationally symmetric potentials, and a dense
matrix from a Lippmann-Schwinger volume solver for arbitrary bump sums.
"""

from .radial import partial_wave_phase_shift, phase_shift_table
from .smatrix import (
    PhaseSpectrum,
    ScatteringMatrix,
    TruncationPolicy,
    assemble_general_smatrix,
    assemble_radial_smatrix,
    eigenphases,
)
from .transport import wavepacket_transport_check

__all__ = [
    "partial_wave_phase_shift",
    "phase_shift_table",
    "PhaseSpectrum",
    "ScatteringMatrix",
    "TruncationPolicy",
    "assemble_general_smatrix",
    "assemble_radial_smatrix",
    "eigenphases",
    "wavepacket_transport_check",
]
