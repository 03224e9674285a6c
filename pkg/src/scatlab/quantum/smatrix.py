"""Scattering matrices in the angular Fourier basis and their spectra.

Basis: normalised modes e^{i m theta}/sqrt(2 pi), m = -M..M, with the
mode count M(h) set by the truncation policy.  The partial-wave backend
fills the diagonal exp(2 i delta_|m|); the general backend converts
far-field amplitudes to the kernel of S - I via

    S(w', v) = delta(w' - v) + gamma_h f(-w'; -v),
    gamma_h = e^{i pi/4} / sqrt(2 pi h),

the normalisation pinned by two requirements: the zero potential gives
the identity, and rotationally symmetric potentials reproduce the
partial-wave eigenvalues exp(2 i delta_m) exactly (checked in tests).
The antipodal arguments reflect that a ray travelling toward w enters
the sphere at infinity at -w; eigenphases are insensitive to them, but
wavepacket transport is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import PotentialSpec
from ..errors import EigensolveFailure, UnitarityFailure
from ..util import digest_of
from .lippmann import GridPolicy, solve_farfield_matrix
from .radial import phase_shift_table


@dataclass(frozen=True)
class TruncationPolicy:
    """Angular mode cutoff M(h) = ceil((R0+margin)/h) + cube-root pad.

    Modes beyond (R0 + margin)/h are centrifugally excluded from the
    support; the cube-root pad covers the slow Airy transition of J_m
    near its turning point, and the constant keeps small problems sane.
    """

    margin: float = 0.5
    pad_coefficient: float = 3.0
    pad_constant: int = 10

    def mode_cutoff(self, support_radius: float, h: float) -> int:
        if h <= 0:
            raise ValueError("h must be positive")
        core = math.ceil((support_radius + self.margin) / h)
        pad = math.ceil(self.pad_coefficient * (support_radius / h) ** (1.0 / 3.0))
        return int(core + pad + self.pad_constant)


@dataclass(frozen=True)
class ScatteringMatrix:
    """Truncated unitary S in the angular Fourier basis, with provenance."""

    h: float
    m_cut: int
    entries: np.ndarray
    backend: str
    potential_hash: str

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (2 * self.m_cut + 1, 2 * self.m_cut + 1):
            raise ValueError("entry matrix must be (2M+1) x (2M+1)")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return 2 * self.m_cut + 1

    @property
    def is_diagonal(self) -> bool:
        off = self.entries - np.diag(np.diag(self.entries))
        return not np.any(off)

    def unitarity_defect(self) -> float:
        s = self.entries
        return float(np.linalg.norm(s.conj().T @ s - np.eye(self.dim), 2))

    def off_diagonal_mass(self) -> float:
        off = self.entries - np.diag(np.diag(self.entries))
        return float(np.linalg.norm(off, "fro"))


@dataclass(frozen=True)
class PhaseSpectrum:
    """Eigenphases beta_n in (-pi, pi], sorted by |e^{i beta} - 1|
    nonincreasing, multiplicities kept."""

    phases: np.ndarray
    h: float
    m_cut: int

    def __post_init__(self):
        ph = np.array(self.phases, dtype=float)
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    @property
    def gaps(self) -> np.ndarray:
        """Distances |e^{i beta_n} - 1| in the sorted order."""
        return 2.0 * np.abs(np.sin(0.5 * self.phases))


def gamma_normalisation(h: float) -> complex:
    return complex(math.cos(math.pi / 4.0), math.sin(math.pi / 4.0)) / math.sqrt(
        2.0 * math.pi * h
    )


def assemble_radial_smatrix(
    p: PotentialSpec,
    h: float,
    policy: TruncationPolicy | None = None,
    ode_rtol: float = 1e-11,
    workers: int = 1,
) -> ScatteringMatrix:
    """Diagonal S with entries exp(2 i delta_|m|), m = -M..M."""
    policy = policy or TruncationPolicy()
    if not p.is_radial:
        raise ValueError("radial backend requires a rotationally symmetric potential")
    m_cut = policy.mode_cutoff(p.support_radius, h)
    if p.is_zero:
        entries = np.eye(2 * m_cut + 1, dtype=complex)
    else:
        shifts = phase_shift_table(p, h, m_cut, ode_rtol=ode_rtol, workers=workers)
        diag = [np.exp(2j * shifts[abs(m)]) for m in range(-m_cut, m_cut + 1)]
        entries = np.diag(diag).astype(complex)
    return ScatteringMatrix(
        h=h,
        m_cut=m_cut,
        entries=entries,
        backend="radial",
        potential_hash=digest_of(p.to_record()),
    )


def assemble_general_smatrix(
    p: PotentialSpec,
    h: float,
    policy: TruncationPolicy | None = None,
    grid_policy: GridPolicy | None = None,
    unitarity_tol: float = 1e-6,
) -> ScatteringMatrix:
    """Dense S from the volume solver's far fields.

    The double angular trapezoid (spectrally accurate for the analytic
    far field) converts the kernel to the Fourier basis; the unitarity
    defect is checked before returning and failure raises, since a bad
    defect signals a resolution or normalisation bug rather than a
    recoverable condition.
    """
    policy = policy or TruncationPolicy()
    grid_policy = grid_policy or GridPolicy()
    m_cut = policy.mode_cutoff(p.support_radius, h)
    dim = 2 * m_cut + 1
    if p.is_zero:
        return ScatteringMatrix(
            h=h,
            m_cut=m_cut,
            entries=np.eye(dim, dtype=complex),
            backend="lippmann-schwinger",
            potential_hash=digest_of(p.to_record()),
        )

    n_dir = grid_policy.n_directions or (4 * m_cut + 64)
    if n_dir % 2:
        n_dir += 1
    angles = np.arange(n_dir) * (2.0 * math.pi / n_dir)
    far = solve_farfield_matrix(p, h, grid_policy, angles)
    # kernel arguments are antipodal: shift both axes by half a turn
    half = n_dir // 2
    far = np.roll(np.roll(far, -half, axis=0), -half, axis=1)

    ms = np.arange(-m_cut, m_cut + 1)
    e_out = np.exp(-1j * np.outer(ms, angles))  # (dim, n_dir)
    e_in = np.exp(1j * np.outer(angles, ms))  # (n_dir, dim)
    dtheta = 2.0 * math.pi / n_dir
    kernel_to_fourier = (dtheta * dtheta) / (2.0 * math.pi)
    s = np.eye(dim, dtype=complex) + gamma_normalisation(h) * kernel_to_fourier * (
        e_out @ far @ e_in
    )
    matrix = ScatteringMatrix(
        h=h,
        m_cut=m_cut,
        entries=s,
        backend="lippmann-schwinger",
        potential_hash=digest_of(p.to_record()),
    )
    defect = matrix.unitarity_defect()
    if defect > unitarity_tol:
        raise UnitarityFailure(
            f"unitarity defect {defect:.3e} exceeds {unitarity_tol:.1e} at h={h}"
        )
    return matrix


def eigenphases(s: ScatteringMatrix, modulus_tol: float = 1e-6) -> PhaseSpectrum:
    """Eigenphase spectrum of a (numerically) unitary matrix.

    Eigenvalues are projected to the unit circle after a modulus gate;
    phases are sorted by distance of e^{i beta} from 1, nonincreasing.
    """
    if s.is_diagonal:
        lam = np.diag(s.entries).copy()
    else:
        try:
            lam = np.linalg.eigvals(s.entries)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise EigensolveFailure(str(exc)) from exc
    mods = np.abs(lam)
    worst = float(np.max(np.abs(mods - 1.0)))
    if worst > modulus_tol:
        raise EigensolveFailure(
            f"eigenvalue modulus deviates from 1 by {worst:.3e} (tol {modulus_tol:.1e})"
        )
    lam = lam / mods
    beta = np.angle(lam)
    order = np.argsort(-np.abs(lam - 1.0), kind="stable")
    return PhaseSpectrum(phases=beta[order], h=s.h, m_cut=s.m_cut)
