# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: adaptive Dormand-Prince 5(4) steppers.

Operation-for-operation mirror of kernels/pure.py (same tableau, same
error norms, same rescaling thresholds); see that module for the
contracts.  Dimension is generic; the inner loops run on C doubles.
"""

from libc.math cimport exp, sqrt, log, fabs, pow

import numpy as np

IMPL_NAME = "compiled"

cdef double _C2 = 0.2, _C3 = 0.3, _C4 = 0.8, _C5 = 8.0 / 9.0
cdef double _A21 = 0.2
cdef double _A31 = 3.0 / 40.0, _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0, _A64 = 49.0 / 176.0, _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0, _B3 = 500.0 / 1113.0, _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0, _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0, _E3 = -71.0 / 16695.0, _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0, _E6 = 22.0 / 525.0, _E7 = -1.0 / 40.0

ESCAPED = 0
TIMED_OUT = 1
STEP_UNDERFLOW = 2
STEP_BUDGET = 3

cdef int MAXD = 8


cdef inline void _rhs(double* y, double* out, double[:, ::1] bumps, int nb, int d):
    cdef int i, b
    cdef double s, dx, g, amp_g, coeff, a
    for i in range(d):
        out[i] = 2.0 * y[d + i]
        out[d + i] = 0.0
    for b in range(nb):
        a = bumps[b, d + 1]
        s = 0.0
        for i in range(d):
            dx = y[i] - bumps[b, i]
            s += dx * dx
        s /= a * a
        if s >= 1.0:
            continue
        g = exp(1.0 - 1.0 / (1.0 - s))
        amp_g = bumps[b, d] * g
        coeff = amp_g * (-2.0 / (a * a * (1.0 - s) * (1.0 - s)))
        for i in range(d):
            out[d + i] -= coeff * (y[i] - bumps[b, i])


cdef inline double _potential(double* y, double[:, ::1] bumps, int nb, int d):
    cdef int i, b
    cdef double s, dx, v, a
    v = 0.0
    for b in range(nb):
        a = bumps[b, d + 1]
        s = 0.0
        for i in range(d):
            dx = y[i] - bumps[b, i]
            s += dx * dx
        s /= a * a
        if s < 1.0:
            v += bumps[b, d] * exp(1.0 - 1.0 / (1.0 - s))
    return v


cdef inline double _energy(double* y, double[:, ::1] bumps, int nb, int d):
    cdef double ke = 0.0
    cdef int i
    for i in range(d):
        ke += y[d + i] * y[d + i]
    return ke + _potential(y, bumps, nb, d)


def flow_propagate(x0, xi0, bumps, double escape_radius, double t_max,
                   double rtol, double atol, double max_step=1.0,
                   long max_steps=2000000):
    """See kernels.pure.flow_propagate."""
    cdef int d = len(x0)
    if d > MAXD:
        raise ValueError("dimension too large for the compiled kernel")
    cdef int n = 2 * d
    cdef double[:, ::1] brows = np.ascontiguousarray(
        np.asarray(bumps, dtype=np.float64).reshape(len(bumps), -1)
    ) if len(bumps) else np.zeros((0, n + 2))
    cdef int nb = brows.shape[0]

    cdef double y[16]
    cdef double ynew[16]
    cdef double ystage[16]
    cdef double k1[16]
    cdef double k2[16]
    cdef double k3[16]
    cdef double k4[16]
    cdef double k5[16]
    cdef double k6[16]
    cdef double k7[16]
    cdef int i
    for i in range(d):
        y[i] = x0[i]
        y[d + i] = xi0[i]

    cdef double t = 0.0
    cdef double e0 = _energy(y, brows, nb, d)
    cdef double drift = 0.0
    cdef double e, de, r2, dot, sc, errnorm, fac, hstep, d0, d1, errc

    _rhs(y, k1, brows, nb, d)
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * fabs(y[i])
        d0 += (y[i] / sc) * (y[i] / sc)
        d1 += (k1[i] / sc) * (k1[i] / sc)
    d0 = sqrt(d0 / n)
    d1 = sqrt(d1 / n)
    hstep = min(max_step, 0.01 * d0 / d1 if d1 > 1e-300 else 1e-6)
    if hstep <= 0:
        hstep = 1e-6

    cdef long nsteps = 0
    while t < t_max:
        if nsteps >= max_steps:
            return _pack(y, d, t, drift, STEP_BUDGET, nsteps)
        if hstep < 1e-14 * max(1.0, fabs(t)):
            return _pack(y, d, t, drift, STEP_UNDERFLOW, nsteps)
        if t + hstep > t_max:
            hstep = t_max - t

        for i in range(n):
            ystage[i] = y[i] + hstep * _A21 * k1[i]
        _rhs(ystage, k2, brows, nb, d)
        for i in range(n):
            ystage[i] = y[i] + hstep * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(ystage, k3, brows, nb, d)
        for i in range(n):
            ystage[i] = y[i] + hstep * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(ystage, k4, brows, nb, d)
        for i in range(n):
            ystage[i] = y[i] + hstep * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        _rhs(ystage, k5, brows, nb, d)
        for i in range(n):
            ystage[i] = y[i] + hstep * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                        + _A64 * k4[i] + _A65 * k5[i])
        _rhs(ystage, k6, brows, nb, d)
        for i in range(n):
            ynew[i] = y[i] + hstep * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                      + _B5 * k5[i] + _B6 * k6[i])
        _rhs(ynew, k7, brows, nb, d)

        errnorm = 0.0
        for i in range(n):
            errc = hstep * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                            + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            sc = atol + rtol * max(fabs(y[i]), fabs(ynew[i]))
            errnorm += (errc / sc) * (errc / sc)
        errnorm = sqrt(errnorm / n)

        if errnorm <= 1.0:
            t += hstep
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            nsteps += 1
            e = _energy(y, brows, nb, d)
            de = fabs(e - e0)
            if de > drift:
                drift = de
            r2 = 0.0
            dot = 0.0
            for i in range(d):
                r2 += y[i] * y[i]
                dot += y[i] * y[d + i]
            if r2 > escape_radius * escape_radius and dot > 0.0:
                return _pack(y, d, t, drift, ESCAPED, nsteps)
            fac = 5.0 if errnorm == 0.0 else min(5.0, max(0.2, 0.9 * pow(errnorm, -0.2)))
            hstep = min(max_step, hstep * fac)
        else:
            hstep *= max(0.2, 0.9 * pow(errnorm, -0.2))

    return _pack(y, d, t, drift, TIMED_OUT, nsteps)


cdef _pack(double* y, int d, double t, double drift, int status, long nsteps):
    x = [y[i] for i in range(d)]
    xi = [y[d + i] for i in range(d)]
    return x, xi, t, drift, status, nsteps


cdef inline double _radial_q(double r, double m2c, double h2, double amp, double a):
    cdef double s = (r / a) * (r / a)
    cdef double v = amp * exp(1.0 - 1.0 / (1.0 - s)) if s < 1.0 else 0.0
    return m2c / (r * r) + (v - 1.0) / h2


def radial_q(double r, double m2c, double h2, double amp, double a):
    return _radial_q(r, m2c, h2, amp, a)


def radial_propagate(double m_abs, double h, double amp, double a,
                     double r_start, double r_end, double u0, double up0,
                     double rtol, double atol, long max_steps=2000000):
    """See kernels.pure.radial_propagate."""
    cdef double m2c = m_abs * m_abs - 0.25
    cdef double h2 = h * h
    cdef double k = 1.0 / h
    cdef double u = u0, v = up0, r = r_start, logscale = 0.0
    cdef double f1u, f1v, q0, hstep
    cdef double u2, v2, f2u, f2v, u3, v3, f3u, f3v, u4, v4, f4u, f4v
    cdef double u5, v5, f5u, f5v, u6, v6, f6u, f6v, unew, vnew, f7u, f7v
    cdef double eu, ev, amp0, amp1, sc, errnorm, fac, mag

    f1u = v
    f1v = _radial_q(r, m2c, h2, amp, a) * u
    q0 = fabs(_radial_q(r, m2c, h2, amp, a))
    hstep = 0.1 / sqrt(q0) if q0 > 1e-300 else 0.1 * (r_end - r_start)
    hstep = min(hstep, r_end - r_start)

    cdef long nsteps = 0
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
        f2v = _radial_q(r + _C2 * hstep, m2c, h2, amp, a) * u2

        u3 = u + hstep * (_A31 * f1u + _A32 * f2u)
        v3 = v + hstep * (_A31 * f1v + _A32 * f2v)
        f3u = v3
        f3v = _radial_q(r + _C3 * hstep, m2c, h2, amp, a) * u3

        u4 = u + hstep * (_A41 * f1u + _A42 * f2u + _A43 * f3u)
        v4 = v + hstep * (_A41 * f1v + _A42 * f2v + _A43 * f3v)
        f4u = v4
        f4v = _radial_q(r + _C4 * hstep, m2c, h2, amp, a) * u4

        u5 = u + hstep * (_A51 * f1u + _A52 * f2u + _A53 * f3u + _A54 * f4u)
        v5 = v + hstep * (_A51 * f1v + _A52 * f2v + _A53 * f3v + _A54 * f4v)
        f5u = v5
        f5v = _radial_q(r + _C5 * hstep, m2c, h2, amp, a) * u5

        u6 = u + hstep * (_A61 * f1u + _A62 * f2u + _A63 * f3u + _A64 * f4u + _A65 * f5u)
        v6 = v + hstep * (_A61 * f1v + _A62 * f2v + _A63 * f3v + _A64 * f4v + _A65 * f5v)
        f6u = v6
        f6v = _radial_q(r + hstep, m2c, h2, amp, a) * u6

        unew = u + hstep * (_B1 * f1u + _B3 * f3u + _B4 * f4u + _B5 * f5u + _B6 * f6u)
        vnew = v + hstep * (_B1 * f1v + _B3 * f3v + _B4 * f4v + _B5 * f5v + _B6 * f6v)
        f7u = vnew
        f7v = _radial_q(r + hstep, m2c, h2, amp, a) * unew

        eu = hstep * (_E1 * f1u + _E3 * f3u + _E4 * f4u + _E5 * f5u + _E6 * f6u + _E7 * f7u)
        ev = hstep * (_E1 * f1v + _E3 * f3v + _E4 * f4v + _E5 * f5v + _E6 * f6v + _E7 * f7v)

        amp0 = sqrt(u * u + (v / k) * (v / k))
        amp1 = sqrt(unew * unew + (vnew / k) * (vnew / k))
        sc = atol + rtol * max(amp0, amp1)
        errnorm = sqrt(eu * eu + (ev / k) * (ev / k)) / sc

        if errnorm <= 1.0:
            r += hstep
            u = unew
            v = vnew
            f1u = f7u
            f1v = f7v
            nsteps += 1
            mag = max(fabs(u), fabs(v))
            if mag > 1e200:
                u /= mag
                v /= mag
                f1u /= mag
                f1v /= mag
                logscale += log(mag)
            fac = 5.0 if errnorm == 0.0 else min(5.0, max(0.2, 0.9 * pow(errnorm, -0.2)))
            hstep = hstep * fac
        else:
            hstep *= max(0.2, 0.9 * pow(errnorm, -0.2))

    return u, v, logscale, ESCAPED, nsteps
