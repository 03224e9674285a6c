"""Coherent-state transport through the scattering matrix.

A normalised wavepacket at chart point (theta0, eta0),

    u(theta) ~ exp(i eta0 theta / h - (theta - theta0)^2 / (2h)),

has Fourier coefficients c_m ~ exp(-h (m - eta0/h)^2 / 2) e^{-i m theta0}.
Applying S and locating the peak of the windowed-Fourier (Husimi)
surface gives the output centre, which is compared against the
classical scattering map image of (theta0, eta0).  Away from the
interaction region S acts as the identity up to spectrally small
corrections, checked by the residual |S u - u|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import CotangentPoint, PotentialSpec
from ..dynamics import Escaped, FlowSettings, NonInteracting, scattering_map
from ..errors import TrappedPoint
from .smatrix import ScatteringMatrix


@dataclass(frozen=True)
class TransportReport:
    center_out: tuple  # (theta, eta)
    center_error: float
    mass_defect: float
    classical_image: tuple


def packet_coefficients(theta0: float, eta0: float, h: float, m_cut: int) -> np.ndarray:
    ms = np.arange(-m_cut, m_cut + 1)
    c = np.exp(-0.5 * h * (ms - eta0 / h) ** 2) * np.exp(-1j * ms * theta0)
    return c / np.linalg.norm(c)


def packet_band_mass_defect(theta0: float, eta0: float, h: float, m_cut: int) -> float:
    """Coefficient mass lost to the truncation band [-M, M]."""
    wide = np.arange(-m_cut - 256, m_cut + 257)
    w = np.exp(-h * (wide - eta0 / h) ** 2)
    total = float(np.sum(w))
    inside = float(np.sum(w[(wide >= -m_cut) & (wide <= m_cut)]))
    return 1.0 - inside / total


def husimi_peak(v: np.ndarray, h: float, m_cut: int, n_theta: int = 512):
    """Peak of |<coherent(theta, eta), v>|^2 over a chart grid, refined
    by parabolic interpolation in both axes."""
    ms = np.arange(-m_cut, m_cut + 1)
    thetas = np.arange(n_theta) * (2.0 * math.pi / n_theta)
    etas = np.arange(-m_cut, m_cut + 0.5001, 0.5) * h
    phases = np.exp(1j * np.outer(thetas, ms))  # (n_theta, dim)

    best = (-1.0, 0, 0)
    surf = np.empty((etas.shape[0], n_theta))
    for i, eta in enumerate(etas):
        w = np.exp(-0.5 * h * (ms - eta / h) ** 2)
        w /= np.linalg.norm(w)
        row = np.abs(phases @ (w * v)) ** 2
        surf[i] = row
    flat = int(np.argmax(surf))
    i0, j0 = divmod(flat, n_theta)

    def parab(fm, f0, fp):
        denom = fm - 2.0 * f0 + fp
        if denom == 0.0:
            return 0.0
        return max(-0.5, min(0.5, 0.5 * (fm - fp) / denom))

    jm, jp = (j0 - 1) % n_theta, (j0 + 1) % n_theta
    dj = parab(surf[i0, jm], surf[i0, j0], surf[i0, jp])
    theta_hat = (j0 + dj) * (2.0 * math.pi / n_theta)
    if 0 < i0 < etas.shape[0] - 1:
        di = parab(surf[i0 - 1, j0], surf[i0, j0], surf[i0 + 1, j0])
    else:
        di = 0.0
    eta_hat = float(etas[i0] + di * 0.5 * h)
    return theta_hat % (2.0 * math.pi), eta_hat


def wavepacket_transport_check(
    s: ScatteringMatrix,
    theta0: float,
    eta0: float,
    p: PotentialSpec,
    flow: FlowSettings,
) -> TransportReport:
    """Transport a coherent state through S and compare the output
    centre with the classical image of (theta0, eta0)."""
    if abs(eta0) > s.m_cut * s.h:
        raise ValueError("packet frequency outside the representable band")
    q = CotangentPoint.from_chart(theta0, eta0)
    out = scattering_map(q, p, flow)
    if isinstance(out, NonInteracting):
        image = (theta0 % (2.0 * math.pi), eta0)
    elif isinstance(out, Escaped):
        image = (out.point.omega.theta % (2.0 * math.pi), out.point.eta_signed)
    else:
        raise TrappedPoint(f"classical image of ({theta0}, {eta0}) is undefined")

    u = packet_coefficients(theta0, eta0, s.h, s.m_cut)
    v = s.entries @ u
    theta_hat, eta_hat = husimi_peak(v, s.h, s.m_cut)
    dtheta = abs(math.remainder(theta_hat - image[0], 2.0 * math.pi))
    err = dtheta + abs(eta_hat - image[1])
    return TransportReport(
        center_out=(theta_hat, eta_hat),
        center_error=err,
        mass_defect=packet_band_mass_defect(theta0, eta0, s.h, s.m_cut),
        classical_image=image,
    )


def identity_defect(s: ScatteringMatrix, theta0: float, eta0: float) -> float:
    """|S u - u| for a packet centred at (theta0, eta0)."""
    u = packet_coefficients(theta0, eta0, s.h, s.m_cut)
    return float(np.linalg.norm(s.entries @ u - u))
