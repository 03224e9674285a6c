"""Partial-wave phase shifts for rotationally symmetric potentials.

Separating (-h^2 Lap + V) psi = psi in polar coordinates with psi =
sum R_m(r) e^{i m theta} and u = sqrt(r) R_m gives the radial problem

    -h^2 u'' + (V(r) + h^2 (m^2 - 1/4) / r^2) u = u,    u ~ r^{|m|+1/2},

whose solution outside the support is a combination of sqrt(r) J_m(r/h)
and sqrt(r) Y_m(r/h).  Matching the integrated (u, u') against that
pair yields tan delta_m; the scattering matrix eigenvalue on the m-th
angular mode is exp(2 i delta_m).

The integration starts either at r0 = 1e-6 with the regular-series ray
u'/u = (|m|+1/2)/r0 + 2 a2 r0, a2 = (V(0)-1)/((4|m|+4) h^2), or - for
large orders - deeper inside the centrifugally forbidden region at a
radius where at least ~50 units of tunnelling action remain below the
turning point, with the outward-growing WKB ray u'/u = sqrt(q) +
q'/(4 q).  Any ray error there is damped by exp(-2 * action) before the
matching radius, so the cheap start loses nothing.
"""

from __future__ import annotations

import math

from .. import kernels
from ..core import PotentialSpec
from ..cylinder import besselj_ladder, bessely_ladder
from ..errors import MatchFailure, StepFailure

_R0_DEFAULT = 1e-6
_WKB_ACTION_MARGIN = 50.0


def _start_conditions(p: PotentialSpec, m_abs: int, h: float):
    """Starting radius and ray (u, u') for the regular solution."""
    b = p.bumps[0]
    mt = m_abs + 0.5
    vmin = min(0.0, b.amplitude)
    r_wkb = (mt * h / math.sqrt(max(1.0, 1.0 - vmin))) * math.exp(-_WKB_ACTION_MARGIN / mt)
    r_start = max(_R0_DEFAULT, r_wkb)
    if r_start > _R0_DEFAULT:
        m2c = m_abs * m_abs - 0.25
        q = kernels.pure.radial_q(r_start, m2c, h * h, b.amplitude, b.radius)
        if q > 0.0:
            v = p.radial_value(r_start)
            vp = p.radial_derivative(r_start)
            qp = -2.0 * m2c / r_start**3 + vp / (h * h)
            return r_start, 1.0, math.sqrt(q) + qp / (4.0 * q)
        r_start = _R0_DEFAULT
    v0 = p.radial_value(0.0)
    a2 = (v0 - 1.0) / ((4.0 * m_abs + 4.0) * h * h)
    return r_start, 1.0, mt / r_start + 2.0 * a2 * r_start


def partial_wave_phase_shift(
    p: PotentialSpec,
    h: float,
    m: int,
    ode_rtol: float = 1e-11,
    match_margin: float = 0.1,
) -> float:
    """Phase shift delta_m in the principal branch (-pi/2, pi/2].

    The zero potential returns 0 exactly (no scattering), without
    integration.  The matching is carried out in the scaled log
    representation of the cylinder ladders, so order-dominated channels
    (|m| h beyond the support) return their genuinely tiny shifts
    instead of over/underflowing.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if not p.is_radial:
        raise ValueError("partial waves require a rotationally symmetric potential")
    if p.is_zero:
        return 0.0
    m_abs = abs(int(m))
    b = p.bumps[0]
    r_match = b.radius + match_margin

    r_start, u0, up0 = _start_conditions(p, m_abs, h)
    u, up, _, status, nsteps = kernels.radial_propagate(
        float(m_abs), h, b.amplitude, b.radius, r_start, r_match, u0, up0, ode_rtol, 0.0
    )
    if status != kernels.ESCAPED:
        raise StepFailure(f"radial integration stalled (status {status}, {nsteps} steps)")

    k = 1.0 / h
    x = k * r_match
    jf, jpf, jlog = besselj_ladder(m_abs, x)
    yf, ypf, ylog = bessely_ladder(m_abs, x)
    sq = math.sqrt(r_match)
    # F = sqrt(r) J_m(kr): F' = J/(2 sqrt r) + sqrt(r) k J', same exponent
    f_val = sq * jf[m_abs]
    f_der = jf[m_abs] / (2.0 * sq) + sq * k * jpf[m_abs]
    g_val = sq * yf[m_abs]
    g_der = yf[m_abs] / (2.0 * sq) + sq * k * ypf[m_abs]

    num = u * f_der - up * f_val  # carries exp(jlog)
    den = u * g_der - up * g_val  # carries exp(ylog)
    if num == 0.0 and den == 0.0:
        raise MatchFailure(f"matching degenerate at m={m_abs}, h={h}")
    expo = jlog[m_abs] - ylog[m_abs]
    if den == 0.0:
        return 0.5 * math.pi
    t = (num / den) * (math.exp(expo) if expo > -700.0 else 0.0)
    delta = math.atan(t)
    if delta <= -0.5 * math.pi:
        delta += math.pi
    return delta


def phase_shift_table(
    p: PotentialSpec, h: float, m_max: int, ode_rtol: float = 1e-11, workers: int = 1
) -> list[float]:
    """delta_m for m = 0..m_max (delta_{-m} = delta_m by symmetry)."""
    if workers <= 1 or m_max < 8:
        return [partial_wave_phase_shift(p, h, m, ode_rtol) for m in range(m_max + 1)]
    from concurrent.futures import ProcessPoolExecutor

    args = [(p, h, m, ode_rtol) for m in range(m_max + 1)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_shift_worker, args))


def _shift_worker(args):
    p, h, m, ode_rtol = args
    return partial_wave_phase_shift(p, h, m, ode_rtol)


def unwind_continuation(shifts) -> list[float]:
    """Diagnostic branch unwinding: add multiples of pi so consecutive
    orders differ by less than pi/2 where possible.  Assembled matrix
    entries exp(2 i delta) do not depend on this."""
    out = [shifts[0]]
    for d in shifts[1:]:
        prev = out[-1]
        k = round((prev - d) / math.pi)
        out.append(d + k * math.pi)
    return out
