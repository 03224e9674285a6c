"""Cylinder functions: accuracy, identities, scaled extreme orders.

Reference values are produced by independent in-test oracles: the
MacLaurin series for J_0/J_1, the harmonic-weighted log series for Y_0,
and scipy.special as a second opinion on moderate grids.
"""

import math

import numpy as np
import pytest
import scipy.special as sp

from scatlab.cylinder import (
    bessel_pair,
    besselj_ladder,
    bessely_ladder,
    hankel1,
    hankel1_vec,
    wronskian_residual,
)
from scatlab.errors import DomainError

EULER_GAMMA = 0.5772156649015328606


def j0_series_oracle(x: float) -> float:
    """MacLaurin series summed until the term drops below 1e-18."""
    u = 0.25 * x * x
    term, total, k = 1.0, 1.0, 0
    while abs(term) > 1e-18:
        k += 1
        term *= -u / (k * k)
        total += term
    return total


def y0_series_oracle(x: float) -> float:
    u = 0.25 * x * x
    term, j0, s, hk, k = 1.0, 1.0, 0.0, 0.0, 0
    while abs(term) > 1e-18:
        k += 1
        term *= -u / (k * k)
        hk += 1.0 / k
        j0 += term
        s -= hk * term
    return (2.0 / math.pi) * ((math.log(0.5 * x) + EULER_GAMMA) * j0 + s)


def test_j0_at_one_matches_series_oracle():
    oracle = j0_series_oracle(1.0)
    assert abs(oracle - 0.7651976865579666) < 1e-15
    assert abs(bessel_pair(0, 1.0).j - oracle) < 5e-13


def test_h0_at_one_matches_series_oracles():
    val, _ = hankel1(0, 1.0)
    assert abs(val.real - j0_series_oracle(1.0)) < 5e-13
    assert abs(val.imag - y0_series_oracle(1.0)) < 5e-13
    assert abs(val.imag - 0.0882569642156769) < 1e-12


def test_small_argument_limits():
    assert abs(bessel_pair(0, 1e-8).j - 1.0) < 1e-15
    for m in (1, 2, 7):
        assert abs(bessel_pair(m, 1e-8).j) < 1e-8


def test_wronskian_identity_spot_grid():
    for m in (1, 10, 100, 1000):
        for x in (0.5, 10.0, 500.0):
            res = wronskian_residual(bessel_pair(m, x))
            assert res < 1e-9, (m, x, res)


def test_wronskian_identity_log_spaced_grid():
    ms = np.unique(np.geomspace(1, 2e4, 20).astype(int))
    xs = np.geomspace(0.05, 5e3, 20)
    worst = 0.0
    for m in ms:
        for x in xs:
            worst = max(worst, wronskian_residual(bessel_pair(int(m), float(x))))
    assert worst < 1e-9, worst


def test_three_term_recurrence_consistency():
    for m in (1, 5, 40):
        for x in (0.7, 13.0, 211.0):
            jm1 = bessel_pair(m - 1, x).j
            j = bessel_pair(m, x).j
            jp1 = bessel_pair(m + 1, x).j
            lhs = jm1 + jp1
            rhs = (2.0 * m / x) * j
            scale = max(abs(jm1), abs(j), abs(jp1))
            if abs(rhs) > 1e-3 * scale:  # away from zeros
                assert abs(lhs - rhs) <= 1e-9 * max(abs(rhs), scale)


def test_monotone_decay_beyond_turning_point():
    for x in (2.0, 50.0, 700.0):
        m_lo = int(math.ceil(x)) + 2
        jf, _, jlog = besselj_ladder(m_lo + 40, x)
        mags = [jlog[m] + math.log(abs(jf[m])) for m in range(m_lo, m_lo + 40)]
        assert all(b < a for a, b in zip(mags, mags[1:]))


def test_underflow_flag_and_scaled_values():
    ev = bessel_pair(20000, 0.5)
    assert ev.j_underflow
    assert ev.j == 0.0
    # scaled representation still carries the magnitude: J_m ~ (x/2)^m/m!
    expected_log = 20000 * math.log(0.25) - (
        0.5 * math.log(2 * math.pi * 20000) + 20000 * (math.log(20000.0) - 1.0)
    )
    got = ev.j_log + math.log(abs(ev.j_frac))
    assert abs(got - expected_log) / abs(expected_log) < 1e-3
    # Y side overflows doubles but the log form stays finite
    assert ev.y_log > 700.0
    assert math.isinf(ev.y) or abs(ev.y) > 1e290


def test_scipy_cross_check_moderate_grid():
    rng = np.random.default_rng(11)
    for _ in range(150):
        m = int(rng.integers(0, 60))
        x = float(rng.uniform(0.05, 80.0))
        ev = bessel_pair(m, x)
        env = max(abs(sp.jv(m, x)), abs(sp.yv(m, x)))
        assert abs(ev.j - sp.jv(m, x)) <= 1e-10 * env
        assert abs(ev.y - sp.yv(m, x)) <= 1e-10 * env
        assert abs(ev.j_prime - sp.jvp(m, x)) <= 1e-9 * max(env, abs(sp.jvp(m, x)))
        assert abs(ev.y_prime - sp.yvp(m, x)) <= 1e-9 * max(env, abs(sp.yvp(m, x)))


def test_hankel_modulus_identity():
    for x in (0.3, 2.0, 40.0):
        h, _ = hankel1(0, x)
        ev = bessel_pair(0, x)
        assert abs(abs(h) ** 2 - (ev.j**2 + ev.y**2)) <= 1e-14 * abs(h) ** 2


def test_hankel_large_argument_asymptotics():
    """H_0^(1)(x) ~ sqrt(2/(pi x)) e^{i(x - pi/4)} within 2/x relative."""
    for x in (100.0, 400.0, 2000.0):
        h, _ = hankel1(0, x)
        lead = math.sqrt(2.0 / (math.pi * x)) * complex(
            math.cos(x - math.pi / 4), math.sin(x - math.pi / 4)
        )
        assert abs(h - lead) / abs(lead) <= 2.0 / x


def test_vectorised_hankel_matches_scalar():
    xs = np.array([0.2, 1.0, 5.0, 11.9, 12.1, 40.0, 300.0])
    for order in (0, 1):
        vec = hankel1_vec(xs, order)
        for x, v in zip(xs, vec):
            ref, _ = hankel1(order, float(x))
            assert abs(v - ref) <= 1e-9 * max(1.0, abs(ref))


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_pair(0, 0.0)
    with pytest.raises(DomainError):
        bessel_pair(3, -1.0)
    with pytest.raises(ValueError):
        bessel_pair(-1, 1.0)


def test_y_ladder_matches_pairwise_evaluation():
    yf, ypf, ylog = bessely_ladder(30, 7.3)
    for m in (0, 3, 17, 30):
        ev = bessel_pair(m, 7.3)
        ours = yf[m] * math.exp(ylog[m])
        assert abs(ours - ev.y) <= 1e-12 * max(1.0, abs(ev.y))
