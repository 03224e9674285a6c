"""Pure-Python reference kernels: adaptive Dormand-Prince 5(4) steppers.

Two hot loops live here: Hamiltonian trajectory propagation through a
sum of smooth bumps, and the radial wave equation used by the
partial-wave backend.  The compiled extension mirrors this module
operation for operation; either implementation may serve the rest of
the package.

Status codes: 0 escaped / reached end, 1 hit the time budget, 2 step
size underflow, 3 step budget exhausted.
"""

from __future__ import annotations

import math

IMPL_NAME = "pure"

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

ESCAPED = 0
TIMED_OUT = 1
STEP_UNDERFLOW = 2
STEP_BUDGET = 3


def bump_value_grad(x, bumps):
    """Potential value and gradient at position x (list of floats).

    bumps is a flat sequence of (center..., amplitude, radius) rows with
    d center components each.
    """
    d = len(x)
    v = 0.0
    grad = [0.0] * d
    for row in bumps:
        a = row[d + 1]
        s = 0.0
        for i in range(d):
            dx = x[i] - row[i]
            s += dx * dx
        s /= a * a
        if s >= 1.0:
            continue
        g = math.exp(1.0 - 1.0 / (1.0 - s))
        amp_g = row[d] * g
        v += amp_g
        coeff = amp_g * (-2.0 / (a * a * (1.0 - s) * (1.0 - s)))
        for i in range(d):
            grad[i] += coeff * (x[i] - row[i])
    return v, grad


def _flow_rhs(y, bumps, d):
    x = y[:d]
    _, grad = bump_value_grad(x, bumps)
    out = [0.0] * (2 * d)
    for i in range(d):
        out[i] = 2.0 * y[d + i]
        out[d + i] = -grad[i]
    return out


def _energy(y, bumps, d):
    v, _ = bump_value_grad(y[:d], bumps)
    ke = 0.0
    for i in range(d):
        ke += y[d + i] * y[d + i]
    return ke + v


def flow_propagate(
    x0,
    xi0,
    bumps,
    escape_radius,
    t_max,
    rtol,
    atol,
    max_step=1.0,
    max_steps=2_000_000,
    recorder=None,
):
    """Propagate xdot = 2 xi, xidot = -grad V until escape or budget.

    Escape means |x| > escape_radius with x . xi > 0 at an accepted step
    end.  Returns (x, xi, t, max_energy_drift, status, n_steps).  The
    optional recorder(t, x, xi, energy) is invoked at every accepted
    step (pure implementation only; the compiled kernel has no hook).
    """
    d = len(x0)
    n = 2 * d
    y = list(x0) + list(xi0)
    t = 0.0
    e0 = _energy(y, bumps, d)
    drift = 0.0

    k1 = _flow_rhs(y, bumps, d)
    if recorder is not None:
        recorder(t, y[:d], y[d:], e0)
    # initial step from the magnitude balance of state and slope
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (k1[i] / sc) ** 2
    d0 = math.sqrt(d0 / n)
    d1 = math.sqrt(d1 / n)
    hstep = min(max_step, 0.01 * d0 / d1 if d1 > 1e-300 else 1e-6)
    if hstep <= 0:
        hstep = 1e-6

    nsteps = 0
    while t < t_max:
        if nsteps >= max_steps:
            return y[:d], y[d:], t, drift, STEP_BUDGET, nsteps
        if hstep < 1e-14 * max(1.0, abs(t)):
            return y[:d], y[d:], t, drift, STEP_UNDERFLOW, nsteps
        if t + hstep > t_max:
            hstep = t_max - t

        y2 = [y[i] + hstep * _A21 * k1[i] for i in range(n)]
        k2 = _flow_rhs(y2, bumps, d)
        y3 = [y[i] + hstep * (_A31 * k1[i] + _A32 * k2[i]) for i in range(n)]
        k3 = _flow_rhs(y3, bumps, d)
        y4 = [y[i] + hstep * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(n)]
        k4 = _flow_rhs(y4, bumps, d)
        y5 = [
            y[i] + hstep * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            for i in range(n)
        ]
        k5 = _flow_rhs(y5, bumps, d)
        y6 = [
            y[i]
            + hstep
            * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(n)
        ]
        k6 = _flow_rhs(y6, bumps, d)
        ynew = [
            y[i]
            + hstep * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(n)
        ]
        k7 = _flow_rhs(ynew, bumps, d)

        errnorm = 0.0
        for i in range(n):
            e = hstep * (
                _E1 * k1[i]
                + _E3 * k3[i]
                + _E4 * k4[i]
                + _E5 * k5[i]
                + _E6 * k6[i]
                + _E7 * k7[i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            errnorm += (e / sc) ** 2
        errnorm = math.sqrt(errnorm / n)

        if errnorm <= 1.0:
            t += hstep
            y = ynew
            k1 = k7
            nsteps += 1
            e = _energy(y, bumps, d)
            de = abs(e - e0)
            if de > drift:
                drift = de
            if recorder is not None:
                recorder(t, y[:d], y[d:], e)
            r2 = 0.0
            dot = 0.0
            for i in range(d):
                r2 += y[i] * y[i]
                dot += y[i] * y[d + i]
            if r2 > escape_radius * escape_radius and dot > 0.0:
                return y[:d], y[d:], t, drift, ESCAPED, nsteps
            fac = 5.0 if errnorm == 0.0 else min(5.0, max(0.2, 0.9 * errnorm ** (-0.2)))
            hstep = min(max_step, hstep * fac)
        else:
            hstep *= max(0.2, 0.9 * errnorm ** (-0.2))

    return y[:d], y[d:], t, drift, TIMED_OUT, nsteps


def radial_q(r, m2c, h2, amp, a):
    """u'' = q(r) u coefficient: (m^2 - 1/4)/r^2 + (V(r) - 1)/h^2."""
    s = (r / a) ** 2
    v = amp * math.exp(1.0 - 1.0 / (1.0 - s)) if s < 1.0 else 0.0
    return m2c / (r * r) + (v - 1.0) / h2


def radial_propagate(
    m_abs,
    h,
    amp,
    a,
    r_start,
    r_end,
    u0,
    up0,
    rtol,
    atol,
    max_steps=2_000_000,
):
    """Propagate u'' = q(r) u from r_start to r_end with rescaling.

    Only the ray direction of (u, u') matters to callers; the pair is
    renormalised whenever it grows past 1e200 and the accumulated log
    scale is returned.  The error norm treats (u, u'/k) as one
    oscillator amplitude so zeros of u do not stall the controller.
    Returns (u, up, log_scale, status, n_steps).
    """
    m2c = m_abs * m_abs - 0.25
    h2 = h * h
    k = 1.0 / h
    u = u0
    v = up0
    r = r_start
    logscale = 0.0

    f1u = v
    f1v = radial_q(r, m2c, h2, amp, a) * u
    # initial step against the local oscillation/growth rate
    q0 = abs(radial_q(r, m2c, h2, amp, a))
    hstep = 0.1 / math.sqrt(q0) if q0 > 1e-300 else 0.1 * (r_end - r_start)
    hstep = min(hstep, r_end - r_start)

    nsteps = 0
    while r < r_end:
        if nsteps >= max_steps:
            return u, v, logscale, STEP_BUDGET, nsteps
        if hstep < 1e-15 * max(r, 1e-6):
            return u, v, logscale, STEP_UNDERFLOW, nsteps
        if r + hstep > r_end:
            hstep = r_end - r

        u2 = u + hstep * _A21 * f1u
        v2 = v + hstep * _A21 * f1v
        f2u = v2
        f2v = radial_q(r + _C2 * hstep, m2c, h2, amp, a) * u2

        u3 = u + hstep * (_A31 * f1u + _A32 * f2u)
        v3 = v + hstep * (_A31 * f1v + _A32 * f2v)
        f3u = v3
        f3v = radial_q(r + _C3 * hstep, m2c, h2, amp, a) * u3

        u4 = u + hstep * (_A41 * f1u + _A42 * f2u + _A43 * f3u)
        v4 = v + hstep * (_A41 * f1v + _A42 * f2v + _A43 * f3v)
        f4u = v4
        f4v = radial_q(r + _C4 * hstep, m2c, h2, amp, a) * u4

        u5 = u + hstep * (_A51 * f1u + _A52 * f2u + _A53 * f3u + _A54 * f4u)
        v5 = v + hstep * (_A51 * f1v + _A52 * f2v + _A53 * f3v + _A54 * f4v)
        f5u = v5
        f5v = radial_q(r + _C5 * hstep, m2c, h2, amp, a) * u5

        u6 = u + hstep * (_A61 * f1u + _A62 * f2u + _A63 * f3u + _A64 * f4u + _A65 * f5u)
        v6 = v + hstep * (_A61 * f1v + _A62 * f2v + _A63 * f3v + _A64 * f4v + _A65 * f5v)
        f6u = v6
        f6v = radial_q(r + hstep, m2c, h2, amp, a) * u6

        unew = u + hstep * (_B1 * f1u + _B3 * f3u + _B4 * f4u + _B5 * f5u + _B6 * f6u)
        vnew = v + hstep * (_B1 * f1v + _B3 * f3v + _B4 * f4v + _B5 * f5v + _B6 * f6v)
        f7u = vnew
        f7v = radial_q(r + hstep, m2c, h2, amp, a) * unew

        eu = hstep * (_E1 * f1u + _E3 * f3u + _E4 * f4u + _E5 * f5u + _E6 * f6u + _E7 * f7u)
        ev = hstep * (_E1 * f1v + _E3 * f3v + _E4 * f4v + _E5 * f5v + _E6 * f6v + _E7 * f7v)

        amp0 = math.sqrt(u * u + (v / k) * (v / k))
        amp1 = math.sqrt(unew * unew + (vnew / k) * (vnew / k))
        sc = atol + rtol * max(amp0, amp1)
        errnorm = math.sqrt(eu * eu + (ev / k) * (ev / k)) / sc

        if errnorm <= 1.0:
            r += hstep
            u = unew
            v = vnew
            f1u = f7u
            f1v = f7v
            nsteps += 1
            mag = max(abs(u), abs(v))
            if mag > 1e200:
                u /= mag
                v /= mag
                f1u /= mag
                f1v /= mag
                logscale += math.log(mag)
            fac = 5.0 if errnorm == 0.0 else min(5.0, max(0.2, 0.9 * errnorm ** (-0.2)))
            hstep = hstep * fac
        else:
            hstep *= max(0.2, 0.9 * errnorm ** (-0.2))

    return u, v, logscale, ESCAPED, nsteps
