"""Classical scattering: Hamiltonian flow, the scattering map and its
iterates, the central-field deflection oracle, and Monte-Carlo
estimators of phase-space volumes on T*S^{d-1}.

The scattering map kappa sends an incoming (omega, eta) to the outgoing
(omega', eta') of the trajectory with p = |xi|^2 + V = 1.  Off the
interaction region (rays missing every bump ball) it is the identity,
returned bit-exactly without integration.  Trajectories that fail to
leave the escape ball within the time budget are reported trapped;
they realise membership in the incoming trapped set at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import kernels
from .core import CotangentPoint, PhaseSpacePoint, PotentialSpec, UnitDirection, perp
from .errors import CapturedOrbit, NeighborhoodTrapped, StepFailure


@dataclass(frozen=True)
class FlowSettings:
    """Integration knobs for the trajectory kernel."""

    rtol: float = 1e-12
    atol: float = 1e-12
    escape_radius: float = 3.0
    t_max: float = 200.0
    energy_tol: float = 1e-8
    max_step: float = 1.0
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")

    @staticmethod
    def for_potential(p: PotentialSpec, **kw) -> "FlowSettings":
        kw.setdefault("escape_radius", p.support_radius + 2.0)
        return FlowSettings(**kw)


@dataclass(frozen=True)
class FlowResult:
    """Endpoint and bookkeeping of one trajectory integration."""

    point: PhaseSpacePoint
    elapsed: float
    max_energy_drift: float
    escaped: bool
    timed_out: bool
    energy_ok: bool
    n_steps: int


@dataclass(frozen=True)
class Escaped:
    omega_out: UnitDirection
    eta_out: np.ndarray
    time_delay: float
    flight_time: float
    max_energy_drift: float = 0.0

    @property
    def point(self) -> CotangentPoint:
        return CotangentPoint(self.omega_out, self.eta_out)


@dataclass(frozen=True)
class Trapped:
    elapsed: float


@dataclass(frozen=True)
class NonInteracting:
    pass


@dataclass(frozen=True)
class Completed:
    point: CotangentPoint


@dataclass(frozen=True)
class Diverted:
    failed_at_step: int


@dataclass(frozen=True)
class MeasureEstimate:
    """Monte-Carlo estimate of a phase-space volume on T*S^{d-1}."""

    mean: float
    standard_error: float
    sample_count: int
    reference_volume: float


def _bumps_rows(p: PotentialSpec):
    """Flat (center..., amplitude, radius) rows for the kernels."""
    return [tuple(b.center) + (b.amplitude, b.radius) for b in p.bumps]


def hamiltonian_flow(
    rho0: PhaseSpacePoint,
    p: PotentialSpec,
    s: FlowSettings,
    recorder=None,
) -> FlowResult:
    """Integrate xdot = 2 xi, xidot = -grad V from rho0 until the
    trajectory leaves the escape ball moving outward, or t_max."""
    rows = _bumps_rows(p)
    fn = kernels.flow_propagate_recorded if recorder is not None else kernels.flow_propagate
    kw = {"recorder": recorder} if recorder is not None else {}
    x, xi, t, drift, status, nsteps = fn(
        list(rho0.x),
        list(rho0.xi),
        rows,
        s.escape_radius,
        s.t_max,
        s.rtol,
        s.atol,
        s.max_step,
        s.max_steps,
        **kw,
    )
    if status in (kernels.STEP_UNDERFLOW, kernels.STEP_BUDGET):
        raise StepFailure(f"integrator stalled (status {status}) after {nsteps} steps at t={t}")
    return FlowResult(
        point=PhaseSpacePoint(np.array(x), np.array(xi)),
        elapsed=t,
        max_energy_drift=drift,
        escaped=status == kernels.ESCAPED,
        timed_out=status == kernels.TIMED_OUT,
        energy_ok=drift <= s.energy_tol,
        n_steps=nsteps,
    )


def line_meets_support(q: CotangentPoint, p: PotentialSpec) -> bool:
    """Exact test: does the straight ray {s omega + eta} meet any bump ball?"""
    omega = q.omega.components
    for b in p.bumps:
        rel = b.center - q.eta
        perp_part = rel - (rel @ omega) * omega
        if float(perp_part @ perp_part) <= b.radius * b.radius:
            return True
    return False


def scattering_map(q: CotangentPoint, p: PotentialSpec, s: FlowSettings):
    """One pass of the classical scattering map.

    Returns NonInteracting (exact identity) when the incoming ray misses
    the support, Escaped with the outgoing (omega', eta') and the time
    delay in the speed-2 convention, or Trapped on time-budget expiry.
    """
    if not line_meets_support(q, p):
        return NonInteracting()
    omega = q.omega.components
    r0 = p.support_radius
    eta2 = float(q.eta @ q.eta)
    # the ray enters the support ball at arclength -sqrt(r0^2 - |eta|^2);
    # V = 0 up to there, so the free segment is advanced analytically
    s_enter = -math.sqrt(max(r0 * r0 - eta2, 0.0)) - 0.1
    x_start = q.eta + s_enter * omega

    rows = _bumps_rows(p)
    x, xi, t, drift, status, nsteps = kernels.flow_propagate(
        list(x_start),
        list(omega),
        rows,
        s.escape_radius,
        s.t_max,
        s.rtol,
        s.atol,
        s.max_step,
        s.max_steps,
    )
    if status in (kernels.STEP_UNDERFLOW, kernels.STEP_BUDGET):
        raise StepFailure(f"integrator stalled (status {status}) after {nsteps} steps")
    if status == kernels.TIMED_OUT:
        return Trapped(elapsed=t)
    x = np.array(x)
    xi = np.array(xi)
    xin = float(np.linalg.norm(xi))
    omega_out = UnitDirection(xi / xin)
    eta_out = x - (x @ omega_out.components) * omega_out.components
    # ray offsets sigma = x.direction - 2t are invariant along free legs
    sigma_in = float(x_start @ omega)
    sigma_out = float(x @ omega_out.components) - 2.0 * t
    return Escaped(
        omega_out=omega_out,
        eta_out=eta_out,
        time_delay=0.5 * (sigma_in - sigma_out),
        flight_time=t,
        max_energy_drift=drift,
    )


def _reverse(q: CotangentPoint) -> CotangentPoint:
    return CotangentPoint(UnitDirection(-q.omega.components), q.eta)


def iterate_scattering_map(q: CotangentPoint, k: int, p: PotentialSpec, s: FlowSettings):
    """k-fold composition of the scattering map (time reversal for k < 0).

    A trapped pass at step i reports Diverted(i): the input lies in the
    bad set where the k-th iterate is undefined.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    inverse = k < 0
    cur = q
    for step in range(1, abs(k) + 1):
        probe = _reverse(cur) if inverse else cur
        out = scattering_map(probe, p, s)
        if isinstance(out, Trapped):
            return Diverted(failed_at_step=step)
        if isinstance(out, NonInteracting):
            nxt = probe
        else:
            nxt = out.point
        cur = _reverse(nxt) if inverse else nxt
    return Completed(point=cur)


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    c = float(np.clip(u @ v, -1.0, 1.0))
    return math.acos(c)


def cotangent_distance(a: CotangentPoint, b: CotangentPoint) -> float:
    """Chart-free distance angle(omega, omega') + |eta - eta'|."""
    return angle_between(a.omega.components, b.omega.components) + float(
        np.linalg.norm(a.eta - b.eta)
    )


# ---------------------------------------------------------------------------
# central-field deflection oracle


def _radial_g(p: PotentialSpec, r: float, eta2: float) -> float:
    return 1.0 - p.radial_value(r) - eta2 / (r * r)


def _outer_turning_point(p: PotentialSpec, eta: float) -> float:
    """Outermost root of 1 - V(r) - eta^2/r^2 (radial turning point)."""
    r0 = p.support_radius
    eta2 = eta * eta
    n = 4000
    rs = np.linspace(r0, max(abs(eta) * 1e-3, 1e-9), n)
    prev = rs[0]
    gprev = _radial_g(p, prev, eta2)
    if gprev <= 0.0:
        raise CapturedOrbit("no room outside the support at this impact parameter")
    for r in rs[1:]:
        g = _radial_g(p, r, eta2)
        if g <= 0.0:
            return brentq(lambda rr: _radial_g(p, rr, eta2), r, prev, xtol=1e-14, rtol=1e-15)
        prev, gprev = r, g
    raise CapturedOrbit("no turning point found; ray reaches the origin")


def deflection_angle_radial(p: PotentialSpec, eta: float) -> float:
    """Signed deflection of a central-field trajectory at energy 1.

    Positive values rotate the outgoing direction counterclockwise.  In
    the oriented chart used here (signed eta equal to the angular
    momentum x ^ xi), a repulsive bump deflects eta > 0 rays clockwise,
    so the returned angle is -sign(eta) * (pi - Delta_phi) with
    Delta_phi the swept polar angle

        Delta_phi = 2 * int_{r_min}^inf (|eta|/r^2) / sqrt(1 - V - eta^2/r^2) dr.

    The endpoint square-root singularity is removed by r = r_min + u^2
    and the free tail beyond the support integrates to arcsin(|eta|/R0).
    """
    if not p.is_radial:
        raise ValueError("deflection oracle requires a radial potential")
    if p.is_zero:
        return 0.0
    a = p.bumps[0].radius
    if abs(eta) >= a:
        return 0.0
    if eta == 0.0:
        # head-on ray: passes through for sub-unit barriers, reflects else
        return math.pi if p.bumps[0].amplitude >= 1.0 else 0.0

    ae = abs(eta)
    eta2 = ae * ae
    r0 = p.support_radius
    rmin = _outer_turning_point(p, ae)
    gprime = -p.radial_derivative(rmin) + 2.0 * eta2 / rmin**3
    # near a degenerate turning point the trajectory orbits and the
    # sweep diverges; refuse both a flat root and an interior barrier
    # touch (the forbidden ring can be too thin for the root scan)
    if gprime <= 1e-6:
        raise CapturedOrbit(f"grazing turning point at r={rmin}")
    probe = np.linspace(rmin + 0.02 * (r0 - rmin), r0, 3000)
    if min(_radial_g(p, float(r), eta2) for r in probe) <= 1e-5:
        raise CapturedOrbit(f"effective barrier touches the energy level inside ({ae=})")

    def integrand(u: float) -> float:
        r = rmin + u * u
        g = _radial_g(p, r, eta2)
        if g <= 0.0:
            # clipped by roundoff right at the endpoint
            return 2.0 * ae / (rmin * rmin * math.sqrt(gprime))
        return 2.0 * u * ae / (r * r * math.sqrt(g))

    umax = math.sqrt(r0 - rmin)
    inner, _ = quad(integrand, 0.0, umax, epsabs=1e-12, epsrel=1e-11, limit=200)
    tail = math.asin(ae / r0)
    delta_phi = 2.0 * (inner + tail)
    return -math.copysign(1.0, eta) * (math.pi - delta_phi)


# ---------------------------------------------------------------------------
# Monte-Carlo estimators


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * r**n


def reference_volume(d: int, R: float) -> float:
    """Liouville volume of the sampling box {(omega, eta): |eta| <= R}."""
    return _sphere_area(d) * _ball_volume(d - 1, R)


def sample_cotangent_points(d: int, R: float, n: int, seed: int) -> list[CotangentPoint]:
    """n uniform samples of {|eta| <= R}; the draw happens in one pass
    so results are independent of any later work distribution."""
    rng = np.random.default_rng(seed)
    pts: list[CotangentPoint] = []
    if d == 2:
        thetas = rng.uniform(0.0, 2.0 * math.pi, n)
        etas = rng.uniform(-R, R, n)
        for th, e in zip(thetas, etas):
            pts.append(CotangentPoint.from_chart(float(th), float(e)))
        return pts
    gs = rng.standard_normal((n, d))
    gs2 = rng.standard_normal((n, d))
    radii = R * rng.uniform(0.0, 1.0, n) ** (1.0 / (d - 1))
    for g, g2, r in zip(gs, gs2, radii):
        omega = g / np.linalg.norm(g)
        e = g2 - (g2 @ omega) * omega
        e = e / np.linalg.norm(e) * r
        pts.append(CotangentPoint(UnitDirection(omega), e))
    return pts


def _estimate_from_indicator(ind: np.ndarray, ref: float) -> MeasureEstimate:
    n = ind.shape[0]
    mean = float(ind.mean()) * ref
    se = float(ind.std(ddof=1)) * ref / math.sqrt(n) if n > 1 else math.inf
    return MeasureEstimate(mean, se, n, ref)


def interaction_indicator(
    p: PotentialSpec, thetas: np.ndarray, etas: np.ndarray
) -> np.ndarray:
    """Vectorised exact line-ball test for planar samples in chart form."""
    omegas = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    perps = np.stack([omegas[:, 1], -omegas[:, 0]], axis=1)
    hit = np.zeros(thetas.shape[0], dtype=bool)
    for b in p.bumps:
        dist = np.abs(perps @ b.center - etas)
        hit |= dist <= b.radius
    return hit


def estimate_interaction_volume(
    p: PotentialSpec, R: float, n: int, seed: int
) -> MeasureEstimate:
    """Vol of the interaction region by uniform sampling of {|eta| <= R}.

    A sample interacts iff its straight incoming line meets some bump
    ball (the trajectory is exactly straight until it first enters the
    support, so the test is exact geometry, no integration).
    """
    if R < p.support_radius:
        raise ValueError("sampling radius must cover the support")
    ref = reference_volume(p.d, R)
    if p.d == 2:
        rng = np.random.default_rng(seed)
        thetas = rng.uniform(0.0, 2.0 * math.pi, n)
        etas = rng.uniform(-R, R, n)
        ind = interaction_indicator(p, thetas, etas).astype(float)
        return _estimate_from_indicator(ind, ref)
    pts = sample_cotangent_points(p.d, R, n, seed)
    ind = np.array([line_meets_support(q, p) for q in pts], dtype=float)
    return _estimate_from_indicator(ind, ref)


def estimate_trapped_measure(
    p: PotentialSpec, R: float, n: int, s: FlowSettings, seed: int, workers: int = 1
) -> MeasureEstimate:
    """Fraction of the sampling box whose forward trajectory fails to
    escape within t_max, scaled to Liouville volume."""
    pts = sample_cotangent_points(p.d, R, n, seed)
    ind = np.zeros(n)
    for i, q in enumerate(_maybe_parallel_outcomes(pts, p, s, workers)):
        ind[i] = 1.0 if isinstance(q, Trapped) else 0.0
    return _estimate_from_indicator(ind, reference_volume(p.d, R))


def _outcome_worker(args):
    q, p, s = args
    return scattering_map(q, p, s)


def _maybe_parallel_outcomes(pts, p, s, workers):
    if workers <= 1:
        return [scattering_map(q, p, s) if line_meets_support(q, p) else NonInteracting() for q in pts]
    from concurrent.futures import ProcessPoolExecutor

    args = [(q, p, s) for q in pts]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_outcome_worker, args, chunksize=max(1, len(pts) // (8 * workers))))


def estimate_fixed_point_measure(
    p: PotentialSpec,
    l: int,
    epsilons,
    R: float,
    n: int,
    s: FlowSettings,
    seed: int,
    workers: int = 1,
) -> dict:
    """Volume of interacting points displaced less than eps by the l-th
    map iterate, for each eps of a decreasing ladder."""
    if l == 0:
        raise ValueError("period must be nonzero")
    pts = sample_cotangent_points(p.d, R, n, seed)
    ref = reference_volume(p.d, R)
    dists = np.full(n, np.inf)
    for i, q in enumerate(pts):
        if not line_meets_support(q, p):
            continue
        res = iterate_scattering_map(q, l, p, s)
        if isinstance(res, Completed):
            dists[i] = cotangent_distance(res.point, q)
    out = {}
    for eps in epsilons:
        ind = (dists < eps).astype(float)
        out[float(eps)] = _estimate_from_indicator(ind, ref)
    return out


def symplectic_check(q: CotangentPoint, delta: float, p: PotentialSpec, s: FlowSettings) -> float:
    """Central-difference Jacobian determinant of the planar chart map
    (theta, eta) -> (theta', eta'); equals 1 for a symplectomorphism."""
    if q.d != 2:
        raise ValueError("symplectic check is planar only")
    theta0 = q.omega.theta
    eta0 = q.eta_signed

    def chart_map(th, et):
        out = scattering_map(CotangentPoint.from_chart(th, et), p, s)
        if isinstance(out, Trapped):
            raise NeighborhoodTrapped(f"stencil point (theta={th}, eta={et}) is trapped")
        if isinstance(out, NonInteracting):
            return th, et, False
        pt = out.point
        return pt.omega.theta, pt.eta_signed, True

    evals = [
        chart_map(theta0 + delta, eta0),
        chart_map(theta0 - delta, eta0),
        chart_map(theta0, eta0 + delta),
        chart_map(theta0, eta0 - delta),
    ]
    if not any(e[2] for e in evals):
        return 1.0  # identity branch, exact
    dtheta = lambda a, b: math.remainder(a - b, 2.0 * math.pi)
    j00 = dtheta(evals[0][0], evals[1][0]) / (2.0 * delta)
    j10 = (evals[0][1] - evals[1][1]) / (2.0 * delta)
    j01 = dtheta(evals[2][0], evals[3][0]) / (2.0 * delta)
    j11 = (evals[2][1] - evals[3][1]) / (2.0 * delta)
    return j00 * j11 - j01 * j10
