"""Domain types: potentials, launch embedding, non-degeneracy scan."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scatlab.core import (
    CotangentPoint,
    PotentialSpec,
    UnitDirection,
    embed_initial_condition,
    evaluate_potential,
    evaluate_potential_many,
    nondegeneracy_scan,
    perp,
)
from scatlab.errors import LaunchInsideSupport

BUMP = PotentialSpec.radial_bump(0.5, 1.0)


def test_zero_potential_everywhere():
    zero = PotentialSpec.zero()
    for x in ([0.0, 0.0], [0.3, -0.7], [10.0, 2.0]):
        v, g = evaluate_potential(zero, x)
        assert v == 0.0
        assert np.all(g == 0.0)


def test_bump_value_at_center_and_boundary():
    v, g = evaluate_potential(BUMP, [0.0, 0.0])
    assert v == 0.5  # profile equals 1 at the center
    assert np.all(g == 0.0)
    v, g = evaluate_potential(BUMP, [1.0, 0.0])
    assert v == 0.0
    assert np.all(g == 0.0)


def test_support_exact_zero_outside():
    two = PotentialSpec.bump_sum([([1.25, 0.0], 2.0, 0.5), ([-1.25, 0.0], 2.0, 0.5)])
    r0 = two.support_radius
    assert r0 == 1.75
    rng = np.random.default_rng(0)
    for _ in range(200):
        th = rng.uniform(0, 2 * math.pi)
        r = r0 + rng.uniform(0.0, 3.0)
        v, g = evaluate_potential(two, [r * math.cos(th), r * math.sin(th)])
        assert v == 0.0
        assert np.all(g == 0.0)


def test_gradient_matches_finite_differences():
    """Central finite difference of the value reproduces the analytic
    gradient to 1e-6 relative at step 1e-5, on 1000 support samples.

    Samples stay at squared radius fraction <= 0.85: closer to the edge
    the profile's third derivative grows like (1-s)^{-4} and the
    difference quotient itself loses the target accuracy at this step,
    for any correct gradient.
    """
    rng = np.random.default_rng(42)
    pots = [
        BUMP,
        PotentialSpec.radial_bump(-0.5, 1.0),
        PotentialSpec.bump_sum([([1.25, 0.0], 2.0, 0.5), ([-1.25, 0.0], 2.0, 0.5)]),
    ]
    step = 1e-5
    checked = 0
    while checked < 1000:
        p = pots[checked % len(pots)]
        b = p.bumps[rng.integers(len(p.bumps))]
        r = b.radius * math.sqrt(rng.uniform(0.0, 0.85))
        th = rng.uniform(0, 2 * math.pi)
        x = b.center + np.array([r * math.cos(th), r * math.sin(th)])
        _, grad = evaluate_potential(p, x)
        if np.linalg.norm(grad) < 1e-8:
            continue
        fd = np.zeros(2)
        for i in range(2):
            e = np.zeros(2)
            e[i] = step
            fd[i] = (evaluate_potential(p, x + e)[0] - evaluate_potential(p, x - e)[0]) / (
                2 * step
            )
        rel = np.linalg.norm(fd - grad) / np.linalg.norm(grad)
        assert rel <= 1e-6, (p.to_record(), x, rel)
        checked += 1


def test_vectorised_values_match_scalar():
    rng = np.random.default_rng(3)
    xs = rng.uniform(-2, 2, size=(200, 2))
    vals = evaluate_potential_many(BUMP, xs)
    for x, v in zip(xs, vals):
        ref = evaluate_potential(BUMP, x)[0]
        assert abs(v - ref) <= 1e-15 * max(1.0, abs(ref))


def test_embed_initial_condition_basics():
    q = CotangentPoint.from_chart(math.pi, 0.0)  # omega = -e1
    rho = embed_initial_condition(q, 10.0, BUMP.support_radius)
    assert np.allclose(rho.x, [10.0, 0.0], atol=1e-12)
    assert np.allclose(rho.xi, [-1.0, 0.0], atol=1e-15)
    # energy is exactly 1 outside the support
    assert rho.energy(BUMP) == 1.0


def test_embed_with_offset():
    omega = UnitDirection(np.array([1.0, 0.0]))
    eta = np.array([0.0, 0.5])
    q = CotangentPoint(omega, eta)
    rho = embed_initial_condition(q, 10.0, 1.0)
    assert np.allclose(rho.x, [-10.0, 0.5], atol=1e-15)
    assert np.allclose(rho.xi, [1.0, 0.0])


def test_embed_rejects_launch_inside_support():
    q = CotangentPoint.from_chart(0.0, 0.0)
    with pytest.raises(LaunchInsideSupport):
        embed_initial_condition(q, 0.0, 1.0)
    with pytest.raises(LaunchInsideSupport):
        embed_initial_condition(CotangentPoint.from_chart(0.0, 0.5), 1.4, 1.0)


def test_unit_direction_validation():
    with pytest.raises(ValueError):
        UnitDirection(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        CotangentPoint(UnitDirection(np.array([1.0, 0.0])), np.array([0.5, 0.0]))


@settings(max_examples=60, deadline=None)
@given(
    theta=st.floats(-10.0, 10.0, allow_nan=False),
    eta=st.floats(-5.0, 5.0, allow_nan=False),
)
def test_chart_round_trip(theta, eta):
    q = CotangentPoint.from_chart(theta, eta)
    assert abs(q.eta_signed - eta) <= 1e-12 * max(1.0, abs(eta))
    assert abs(math.remainder(q.omega.theta - theta, 2 * math.pi)) <= 1e-12
    # the signed impact parameter equals the angular momentum x ^ xi of
    # the incoming ray
    x = -7.0 * q.omega.components + q.eta
    xi = q.omega.components
    assert abs((x[0] * xi[1] - x[1] * xi[0]) - eta) <= 1e-9 * max(1.0, abs(eta))


def test_nondegeneracy_scan_flags_only_unit_amplitude():
    assert nondegeneracy_scan(PotentialSpec.zero(), 0.05, 1e-3) == []
    assert nondegeneracy_scan(BUMP, 0.05, 1e-3) == []
    hits = nondegeneracy_scan(PotentialSpec.radial_bump(1.0, 1.0), 0.05, 1e-3)
    assert hits, "amplitude-1 bump must flag its center"
    assert any(np.linalg.norm(x) < 0.05 for x in hits)


def test_potential_serialization_round_trip():
    pots = [
        PotentialSpec.zero(),
        BUMP,
        PotentialSpec.radial_bump(-0.5, 1.0),
        PotentialSpec.bump_sum([([1.25, 0.0], 2.0, 0.5), ([-1.25, 0.0], 2.0, 0.5)]),
    ]
    for p in pots:
        q = PotentialSpec.from_record(p.to_record())
        assert q.to_record() == p.to_record()
        assert q.support_radius == p.support_radius
        x = [0.3, 0.1]
        assert evaluate_potential(q, x)[0] == evaluate_potential(p, x)[0]


def test_perp_orientation():
    # perp(e1) = -e2 so that eta_signed equals angular momentum
    assert np.allclose(perp(np.array([1.0, 0.0])), [0.0, -1.0])
