"""Classical scattering map, deflection oracle, volume estimators."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from scatlab.core import CotangentPoint, PhaseSpacePoint, PotentialSpec, UnitDirection
from scatlab.dynamics import (
    Completed,
    Escaped,
    FlowSettings,
    NonInteracting,
    Trapped,
    cotangent_distance,
    deflection_angle_radial,
    estimate_fixed_point_measure,
    estimate_interaction_volume,
    estimate_trapped_measure,
    hamiltonian_flow,
    interaction_indicator,
    iterate_scattering_map,
    line_meets_support,
    reference_volume,
    sample_cotangent_points,
    scattering_map,
    symplectic_check,
)
from scatlab.errors import CapturedOrbit

BUMP = PotentialSpec.radial_bump(0.5, 1.0)
WELL = PotentialSpec.radial_bump(-0.5, 1.0)
TWO = PotentialSpec.bump_sum([([1.25, 0.0], 2.0, 0.5), ([-1.25, 0.0], 2.0, 0.5)])
FLOW = FlowSettings.for_potential(BUMP)


def test_free_flow_is_straight():
    rho = PhaseSpacePoint(np.array([-10.0, 0.0]), np.array([1.0, 0.0]))
    res = hamiltonian_flow(rho, PotentialSpec.zero(), FlowSettings(escape_radius=3.0))
    assert res.escaped
    assert res.max_energy_drift == 0.0
    assert np.allclose(res.point.xi, [1.0, 0.0])
    assert abs(res.point.x[1]) == 0.0
    # x(t) = x0 + 2 t xi
    assert abs(res.point.x[0] - (-10.0 + 2.0 * res.elapsed)) < 1e-9


def test_flow_conserves_energy_and_angular_momentum():
    rho = PhaseSpacePoint(np.array([-3.0, 0.4]), np.array([1.0, 0.0]))
    res = hamiltonian_flow(rho, BUMP, FLOW)
    assert res.escaped
    assert res.max_energy_drift <= 1e-8
    ell0 = -3.0 * 0.0 - 0.4 * 1.0
    ell1 = res.point.x[0] * res.point.xi[1] - res.point.x[1] * res.point.xi[0]
    assert abs(ell1 - ell0) <= 1e-8


def test_flow_recorder_sees_monotone_time():
    rho = PhaseSpacePoint(np.array([-3.0, 0.2]), np.array([1.0, 0.0]))
    rows = []
    hamiltonian_flow(rho, BUMP, FLOW, recorder=lambda t, x, xi, e: rows.append((t, e)))
    ts = [r[0] for r in rows]
    assert ts == sorted(ts) and len(ts) > 3
    assert max(abs(e - rows[0][1]) for _, e in rows) <= 1e-8


def test_noninteracting_is_bit_exact_identity():
    for theta, eta in ((0.3, 1.5), (2.0, -1.01), (4.0, 7.0)):
        q = CotangentPoint.from_chart(theta, eta)
        out = scattering_map(q, BUMP, FLOW)
        assert isinstance(out, NonInteracting)
    # two-bump: a ray through the middle gap misses the support although
    # it crosses the enclosing ball
    q = CotangentPoint.from_chart(math.pi / 2, 0.0)
    assert not line_meets_support(q, TWO)
    assert isinstance(scattering_map(q, TWO, FlowSettings.for_potential(TWO)), NonInteracting)


def deflection_quadrature_oracle(p, eta):
    """Independent deflection integral: direct quadrature of the swept
    angle with the turning point located by bisection on a fine grid."""
    a = p.bumps[0].radius
    ae = abs(eta)
    if ae >= a:
        return 0.0
    rs = np.linspace(a, ae * 1e-4 + 1e-12, 20000)
    g = 1.0 - np.array([p.radial_value(r) for r in rs]) - ae * ae / rs**2
    idx = int(np.argmax(g <= 0.0))
    lo, hi = rs[idx], rs[idx - 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 1.0 - p.radial_value(mid) - ae * ae / mid**2 <= 0:
            lo = mid
        else:
            hi = mid
    rmin = 0.5 * (lo + hi)

    def integrand(u):
        r = rmin + u * u
        g = 1.0 - p.radial_value(r) - ae * ae / (r * r)
        return 0.0 if g <= 0 else 2.0 * u * ae / (r * r * math.sqrt(g))

    inner, _ = quad(integrand, 0.0, math.sqrt(a - rmin), limit=300)
    dphi = 2.0 * (inner + math.asin(ae / a))
    return -math.copysign(1.0, eta) * (math.pi - dphi)


def test_deflection_oracle_properties():
    assert deflection_angle_radial(PotentialSpec.zero(), 0.3) == 0.0
    assert deflection_angle_radial(BUMP, 1.2) == 0.0
    assert deflection_angle_radial(BUMP, -1.0) == 0.0
    for eta in (0.2, 0.55, 0.9):
        th = deflection_angle_radial(BUMP, eta)
        assert abs(th + deflection_angle_radial(BUMP, -eta)) < 1e-12
        assert abs(th - deflection_quadrature_oracle(BUMP, eta)) < 1e-7


def test_deflection_matches_flow_direction():
    """Acceptance-grade check: map direction against the quadrature
    oracle to 1e-5 on both the barrier and the well."""
    for p in (BUMP, WELL):
        s = FlowSettings.for_potential(p)
        for eta in (0.1, 0.3, 0.62, 0.85, -0.44):
            out = scattering_map(CotangentPoint.from_chart(0.0, eta), p, s)
            assert isinstance(out, Escaped)
            th = deflection_angle_radial(p, eta)
            assert abs(math.remainder(out.omega_out.theta - th, 2 * math.pi)) <= 1e-5
            assert abs(out.point.eta_signed - eta) <= 1e-7


def test_captured_orbit_detected_for_unit_barrier_head_on():
    barrier = PotentialSpec.radial_bump(1.0, 1.0)
    # head-on ray reflects: deflection pi by convention
    assert deflection_angle_radial(barrier, 0.0) == math.pi
    strong = PotentialSpec.radial_bump(4.0, 1.0)
    th = deflection_angle_radial(strong, 0.05)
    assert math.pi / 2 < abs(th) <= math.pi  # backscatter off the hard core


def test_well_can_capture_grazing_centrifugal_ray():
    """A deep well plus centrifugal term forms an effective barrier; at
    the critical impact parameter the turning point degenerates and the
    oracle must refuse (orbiting trajectory).  The critical eta is found
    by bisecting the barrier minimum to zero."""
    deep = PotentialSpec.radial_bump(-8.0, 1.0)

    def barrier_min(eta):
        rs = np.linspace(0.999, 0.25, 6000)
        return min(1.0 - deep.radial_value(r) - eta * eta / (r * r) for r in rs)

    lo, hi = 0.3, 0.9  # barrier_min(lo) > 0 > barrier_min(hi)
    assert barrier_min(lo) > 0 > barrier_min(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if barrier_min(mid) > 0:
            lo = mid
        else:
            hi = mid
    with pytest.raises(CapturedOrbit):
        deflection_angle_radial(deep, hi)


def test_iterate_and_time_reversal_round_trip():
    rng = np.random.default_rng(7)
    count = 0
    for _ in range(100):
        q = CotangentPoint.from_chart(rng.uniform(0, 2 * math.pi), rng.uniform(-1.4, 1.4))
        r1 = iterate_scattering_map(q, 1, BUMP, FLOW)
        assert isinstance(r1, Completed)
        r2 = iterate_scattering_map(r1.point, -1, BUMP, FLOW)
        assert isinstance(r2, Completed)
        assert cotangent_distance(r2.point, q) <= 1e-6
        count += 1
    assert count == 100


def test_iterate_matches_single_map():
    q = CotangentPoint.from_chart(0.0, 0.3)
    r = iterate_scattering_map(q, 1, BUMP, FLOW)
    out = scattering_map(q, BUMP, FLOW)
    assert isinstance(r, Completed) and isinstance(out, Escaped)
    assert cotangent_distance(r.point, out.point) == 0.0


def test_iterate_zero_potential_identity():
    q = CotangentPoint.from_chart(1.0, 0.7)
    for k in (1, 3, -2):
        r = iterate_scattering_map(q, k, PotentialSpec.zero(), FlowSettings(escape_radius=2.0))
        assert isinstance(r, Completed)
        assert cotangent_distance(r.point, q) == 0.0


def test_iterate_reports_diverted_on_trapping():
    # near the symmetric bouncing orbit with a tiny time budget, the
    # first pass already times out
    s = FlowSettings.for_potential(TWO, t_max=1.0)
    q = CotangentPoint.from_chart(0.0, 1e-9)
    out = iterate_scattering_map(q, 2, TWO, s)
    assert out == out.__class__(failed_at_step=1)


def test_symplectic_checks():
    s = FlowSettings.for_potential(BUMP, rtol=1e-10, atol=1e-10)
    assert symplectic_check(CotangentPoint.from_chart(0.1, 2.0), 1e-4, BUMP, s) == 1.0
    for eta in (0.3, 0.8):
        det = symplectic_check(CotangentPoint.from_chart(0.2, eta), 1e-4, BUMP, s)
        assert abs(det - 1.0) <= 1e-4


def test_interaction_volume_single_bump_matches_geometry():
    """Line-disc geometry gives Vol(I) = |S^1| * 2a = 4 pi exactly."""
    est = estimate_interaction_volume(BUMP, 1.5, 200_000, seed=3)
    assert abs(est.mean - 4.0 * math.pi) <= 3.0 * est.standard_error
    assert 0.0 <= est.mean <= est.reference_volume


def test_interaction_volume_zero_potential():
    est = estimate_interaction_volume(PotentialSpec.zero(), 1.0, 1000, seed=0)
    assert est.mean == 0.0


def union_length_quadrature_oracle(p, n_dirs=4096):
    """Per-direction union length of the eta intervals hit by the bump
    balls, integrated over the circle by midpoint quadrature."""
    total = 0.0
    for j in range(n_dirs):
        th = (j + 0.5) * 2.0 * math.pi / n_dirs
        perp = np.array([math.sin(th), -math.cos(th)])
        ivals = sorted(
            (float(perp @ b.center) - b.radius, float(perp @ b.center) + b.radius)
            for b in p.bumps
        )
        length = 0.0
        cur_lo, cur_hi = ivals[0]
        for lo, hi in ivals[1:]:
            if lo > cur_hi:
                length += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        length += cur_hi - cur_lo
        total += length
    return total * (2.0 * math.pi / n_dirs)


def test_interaction_volume_two_bumps_vs_quadrature_oracle():
    oracle = union_length_quadrature_oracle(TWO)
    est = estimate_interaction_volume(TWO, 2.25, 400_000, seed=5)
    assert abs(est.mean - oracle) <= 3.0 * est.standard_error


def test_interaction_volume_preserved_by_the_map():
    """Pushing interacting samples through the map and retesting
    membership reproduces the same volume (measure preservation)."""
    R = 1.5
    n = 20_000
    pts = sample_cotangent_points(2, R, n, seed=11)
    raw = np.zeros(n)
    pushed = np.zeros(n)
    for i, q in enumerate(pts):
        raw[i] = 1.0 if line_meets_support(q, BUMP) else 0.0
        if raw[i]:
            out = scattering_map(q, BUMP, FLOW)
            pushed[i] = 1.0 if line_meets_support(out.point, BUMP) else 0.0
        else:
            pushed[i] = 0.0
    ref = reference_volume(2, R)
    se = ref * math.sqrt(2.0) * raw.std(ddof=1) / math.sqrt(n)
    assert abs(raw.mean() - pushed.mean()) * ref <= 3.0 * se + 1e-12


def test_boundary_shell_measure_scales_linearly():
    """The eps-shell around the interaction boundary |eta| = a has
    Liouville volume 8 pi eps for the single bump."""
    rng = np.random.default_rng(17)
    n = 400_000
    thetas = rng.uniform(0, 2 * math.pi, n)
    etas = rng.uniform(-1.5, 1.5, n)
    ref = reference_volume(2, 1.5)
    for eps in (0.1, 0.05, 0.025):
        ind = (np.abs(np.abs(etas) - 1.0) < eps).astype(float)
        est = ind.mean() * ref
        se = ind.std(ddof=1) * ref / math.sqrt(n)
        assert abs(est - 8.0 * math.pi * eps) <= 3.0 * se


def test_trapped_measure_zero_for_radial_bump():
    est = estimate_trapped_measure(BUMP, 1.5, 2000, FLOW, seed=2)
    assert est.mean == 0.0


def test_trapped_measure_two_bumps_nonincreasing_in_time_budget():
    means = []
    for t_max in (3.0, 6.0, 60.0):
        s = FlowSettings.for_potential(TWO, t_max=t_max)
        est = estimate_trapped_measure(TWO, 2.25, 3000, s, seed=9)
        means.append(est.mean)
    assert all(b <= a for a, b in zip(means, means[1:]))
    assert means[0] > 0.0  # tiny budgets flag slow bouncers
    assert means[-1] <= 1e-3 * reference_volume(2, 2.25)


def test_fixed_point_measure_ladder():
    s = FlowSettings.for_potential(BUMP)
    for period in (1, 2):
        ests = estimate_fixed_point_measure(BUMP, period, [0.1, 0.03, 0.01], 1.5, 4000, s, seed=4)
        vals = [ests[e].mean for e in (0.1, 0.03, 0.01)]
        assert vals[0] > 0.0
        assert vals[0] >= vals[1] >= vals[2]


def test_fixed_point_measure_symmetric_in_period_sign():
    s = FlowSettings.for_potential(BUMP)
    a = estimate_fixed_point_measure(BUMP, 1, [0.1], 1.5, 4000, s, seed=21)[0.1]
    b = estimate_fixed_point_measure(BUMP, -1, [0.1], 1.5, 4000, s, seed=22)[0.1]
    comb = math.hypot(a.standard_error, b.standard_error)
    assert abs(a.mean - b.mean) <= 3.0 * comb


def test_zero_potential_fixed_points_empty():
    s = FlowSettings(escape_radius=2.0)
    ests = estimate_fixed_point_measure(PotentialSpec.zero(), 1, [0.1], 1.0, 500, s, seed=1)
    assert ests[0.1].mean == 0.0


def test_indicator_matches_point_test():
    rng = np.random.default_rng(23)
    thetas = rng.uniform(0, 2 * math.pi, 500)
    etas = rng.uniform(-2.2, 2.2, 500)
    vec = interaction_indicator(TWO, thetas, etas)
    for th, eta, hit in zip(thetas, etas, vec):
        q = CotangentPoint.from_chart(float(th), float(eta))
        assert bool(hit) == line_meets_support(q, TWO)


def test_three_dimensional_scattering_smoke():
    """The classical side is dimension-generic: a 3-d radial bump
    conserves |eta| and deflects by the planar oracle angle."""
    p3 = PotentialSpec.radial_bump(0.5, 1.0, d=3)
    s = FlowSettings.for_potential(p3)
    omega = UnitDirection(np.array([1.0, 0.0, 0.0]))
    eta = np.array([0.0, 0.25, 0.35])
    q = CotangentPoint(omega, eta)
    out = scattering_map(q, p3, s)
    assert isinstance(out, Escaped)
    ae = float(np.linalg.norm(eta))
    assert abs(float(np.linalg.norm(out.eta_out)) - ae) <= 1e-7
    th = deflection_angle_radial(PotentialSpec.radial_bump(0.5, 1.0), ae)
    cosang = float(out.omega_out.components @ omega.components)
    assert abs(math.acos(max(-1.0, min(1.0, cosang))) - abs(th)) <= 1e-5
    est = estimate_interaction_volume(p3, 1.5, 50_000, seed=8)
    # |S^2| * pi a^2 = 4 pi^2
    assert abs(est.mean - 4.0 * math.pi**2) <= 3.0 * est.standard_error


def test_trapped_outcome_reported():
    s = FlowSettings.for_potential(TWO, t_max=0.5)
    out = scattering_map(CotangentPoint.from_chart(0.0, 1e-9), TWO, s)
    assert isinstance(out, Trapped)
    assert out.elapsed >= 0.5
