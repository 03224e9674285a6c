"""Shared domain types: phase-space points, potentials, configuration.

Conventions
-----------
* Hamiltonian p(x, xi) = |xi|^2 + V(x); the energy layer of interest is
  p = 1, so free rays move with speed 2 (xdot = 2 xi).
* A point of T*S^{d-1} is a pair (omega, eta) with omega a unit vector
  (incoming direction) and eta a vector orthogonal to omega (impact
  parameter).
* For d = 2 the fibre is one-dimensional and eta is represented by the
  signed scalar eta_s = eta . perp(omega) with perp(omega) = (omega_y,
  -omega_x).  With this orientation eta_s equals the planar angular
  momentum x ^ xi of the incoming ray, and the angular Fourier index m
  of the quantum solvers corresponds to impact parameter m*h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, LaunchInsideSupport

_UNIT_NORM_TOL = 1e-12
_ORTHO_TOL = 1e-10


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def perp(omega: np.ndarray) -> np.ndarray:
    """Oriented normal of a planar unit vector: (omega_y, -omega_x)."""
    return np.array([omega[1], -omega[0]])


@dataclass(frozen=True)
class UnitDirection:
    """Direction on the unit sphere S^{d-1}."""

    components: np.ndarray

    def __post_init__(self):
        v = _readonly(self.components)
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > _UNIT_NORM_TOL:
            raise ValueError(f"direction norm {n!r} deviates from 1 beyond {_UNIT_NORM_TOL}")
        object.__setattr__(self, "components", v)

    @staticmethod
    def from_vector(v) -> "UnitDirection":
        v = np.asarray(v, dtype=float)
        return UnitDirection(v / np.linalg.norm(v))

    @staticmethod
    def from_angle(theta: float) -> "UnitDirection":
        return UnitDirection(np.array([math.cos(theta), math.sin(theta)]))

    @property
    def d(self) -> int:
        return self.components.shape[0]

    @property
    def theta(self) -> float:
        """Polar angle, d = 2 only."""
        if self.d != 2:
            raise ValueError("theta is defined for d = 2 only")
        return math.atan2(self.components[1], self.components[0])


@dataclass(frozen=True)
class CotangentPoint:
    """Point (omega, eta) of T*S^{d-1}: direction plus impact parameter."""

    omega: UnitDirection
    eta: np.ndarray

    def __post_init__(self):
        e = _readonly(self.eta)
        if e.shape != self.omega.components.shape:
            raise ValueError("eta must have the same dimension as omega")
        if abs(float(e @ self.omega.components)) > _ORTHO_TOL:
            raise ValueError("eta must be orthogonal to omega")
        object.__setattr__(self, "eta", e)

    @staticmethod
    def from_chart(theta: float, eta_s: float) -> "CotangentPoint":
        """Planar point from the (theta, signed eta) chart."""
        omega = UnitDirection.from_angle(theta)
        return CotangentPoint(omega, eta_s * perp(omega.components))

    @property
    def d(self) -> int:
        return self.omega.d

    @property
    def eta_signed(self) -> float:
        """Signed impact parameter (d = 2): eta . perp(omega)."""
        if self.d != 2:
            raise ValueError("signed impact parameter is defined for d = 2 only")
        return float(self.eta @ perp(self.omega.components))

    @property
    def eta_norm(self) -> float:
        return float(np.linalg.norm(self.eta))


@dataclass(frozen=True)
class PhaseSpacePoint:
    """Point (x, xi) of T*R^d."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly(self.x))
        object.__setattr__(self, "xi", _readonly(self.xi))

    def energy(self, potential: "PotentialSpec") -> float:
        v, _ = evaluate_potential(potential, self.x)
        return float(self.xi @ self.xi) + v


def bump_profile(s: float) -> float:
    """Standard smooth bump as a function of s = (r/a)^2, equal to 1 at s=0.

    exp(1 - 1/(1-s)) for s < 1, identically 0 for s >= 1; infinitely flat
    at s = 1.
    """
    if s >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - s))


@dataclass(frozen=True)
class Bump:
    """One smooth bump: amplitude * profile(|x - center|/radius)."""

    center: np.ndarray
    amplitude: float
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _readonly(self.center))
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")


@dataclass(frozen=True)
class PotentialSpec:
    """Smooth compactly supported potential as a finite sum of bumps.

    The empty sum is the free potential V = 0.  A single bump centred at
    the origin is flagged radial, which unlocks the partial-wave quantum
    backend and the central-field deflection oracle.
    """

    bumps: tuple = ()
    d: int = 2

    def __post_init__(self):
        bs = tuple(self.bumps)
        for b in bs:
            if b.center.shape != (self.d,):
                raise ValueError("bump center dimension mismatch")
        object.__setattr__(self, "bumps", bs)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(d: int = 2) -> "PotentialSpec":
        return PotentialSpec((), d)

    @staticmethod
    def radial_bump(amplitude: float, radius: float, d: int = 2) -> "PotentialSpec":
        return PotentialSpec((Bump(np.zeros(d), amplitude, radius),), d)

    @staticmethod
    def bump_sum(bumps, d: int = 2) -> "PotentialSpec":
        return PotentialSpec(tuple(Bump(np.asarray(c, float), a, r) for c, a, r in bumps), d)

    # -- structure ------------------------------------------------------

    @property
    def support_radius(self) -> float:
        """Smallest R0 with V identically 0 outside the ball of radius R0."""
        if not self.bumps:
            return 0.0
        return max(float(np.linalg.norm(b.center)) + b.radius for b in self.bumps)

    @property
    def is_zero(self) -> bool:
        return len(self.bumps) == 0 or all(b.amplitude == 0.0 for b in self.bumps)

    @property
    def is_radial(self) -> bool:
        """Rotationally symmetric about the origin (single centred bump or zero)."""
        if self.is_zero:
            return True
        return len(self.bumps) == 1 and float(np.linalg.norm(self.bumps[0].center)) == 0.0

    @property
    def min_value(self) -> float:
        """Lower bound for V (wells make it negative)."""
        return min(0.0, *(b.amplitude for b in self.bumps)) if self.bumps else 0.0

    # -- radial profile (single centred bump) ---------------------------

    def radial_value(self, r: float) -> float:
        if self.is_zero:
            return 0.0
        b = self.bumps[0]
        return b.amplitude * bump_profile((r / b.radius) ** 2)

    def radial_derivative(self, r: float) -> float:
        if self.is_zero:
            return 0.0
        b = self.bumps[0]
        s = (r / b.radius) ** 2
        if s >= 1.0:
            return 0.0
        g = bump_profile(s)
        return b.amplitude * g * (-1.0 / (1.0 - s) ** 2) * (2.0 * r / b.radius**2)

    # -- serialization --------------------------------------------------

    def to_record(self) -> dict:
        if self.is_zero and not self.bumps:
            return {"kind": "zero", "d": self.d}
        if len(self.bumps) == 1 and self.is_radial:
            b = self.bumps[0]
            return {
                "kind": "radial-bump",
                "d": self.d,
                "amplitude": b.amplitude,
                "radius": b.radius,
                "center": list(b.center),
            }
        return {
            "kind": "bump-sum",
            "d": self.d,
            "bumps": [
                {"center": list(b.center), "amplitude": b.amplitude, "radius": b.radius}
                for b in self.bumps
            ],
        }

    @staticmethod
    def from_record(rec: dict) -> "PotentialSpec":
        kind = rec.get("kind")
        d = int(rec.get("d", 2))
        if kind == "zero":
            return PotentialSpec.zero(d)
        if kind == "radial-bump":
            center = np.asarray(rec.get("center", [0.0] * d), float)
            return PotentialSpec((Bump(center, float(rec["amplitude"]), float(rec["radius"])),), d)
        if kind == "bump-sum":
            return PotentialSpec.bump_sum(
                [(b["center"], float(b["amplitude"]), float(b["radius"])) for b in rec["bumps"]], d
            )
        raise ConfigError(f"unknown potential kind {kind!r}")


def evaluate_potential(p: PotentialSpec, x) -> tuple[float, np.ndarray]:
    """Value and exact analytic gradient of the potential at x.

    Both vanish identically outside every bump ball; the gradient of the
    bump profile g(s), s = |x-c|^2/a^2, is -g/(1-s)^2 * 2(x-c)/a^2.
    """
    x = np.asarray(x, dtype=float)
    value = 0.0
    grad = np.zeros_like(x)
    for b in p.bumps:
        rel = x - b.center
        s = float(rel @ rel) / b.radius**2
        if s >= 1.0:
            continue
        g = bump_profile(s)
        value += b.amplitude * g
        grad += b.amplitude * g * (-1.0 / (1.0 - s) ** 2) * (2.0 / b.radius**2) * rel
    return value, grad


def evaluate_potential_many(p: PotentialSpec, xs: np.ndarray) -> np.ndarray:
    """Vectorised potential values on an (n, d) array of positions."""
    xs = np.asarray(xs, dtype=float)
    vals = np.zeros(xs.shape[0])
    for b in p.bumps:
        rel = xs - b.center
        s = np.einsum("ij,ij->i", rel, rel) / b.radius**2
        inside = s < 1.0
        si = s[inside]
        vals[inside] += b.amplitude * np.exp(1.0 - 1.0 / (1.0 - si))
    return vals


def embed_initial_condition(q: CotangentPoint, T: float, support_radius: float) -> PhaseSpacePoint:
    """Phase-space launch point of the incoming ray: x = -T omega + eta, xi = omega.

    Requires T > support_radius + |eta| so the launch point is strictly
    outside the interaction; there V = 0 and p(x, xi) = 1 exactly.
    """
    if T <= support_radius + q.eta_norm:
        raise LaunchInsideSupport(
            f"launch time {T} must exceed support radius {support_radius} + |eta| {q.eta_norm}"
        )
    omega = q.omega.components
    return PhaseSpacePoint(-T * omega + q.eta, omega.copy())


def nondegeneracy_scan(p: PotentialSpec, grid_step: float, tol: float) -> list[np.ndarray]:
    """Grid certificate for non-degeneracy of the unit energy layer.

    The differential of p on {p = 1} can only vanish where xi = 0,
    V(x) = 1 and grad V(x) = 0 simultaneously; this scans the support on
    a grid containing the bump centers and returns every grid point with
    |V - 1| < tol and |grad V| < tol.  An empty list certifies, at grid
    resolution, that the energy layer is non-degenerate.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    hits: list[np.ndarray] = []
    for b in p.bumps:
        n = int(math.ceil(b.radius / grid_step))
        offsets = np.arange(-n, n + 1) * grid_step
        grids = np.meshgrid(*([offsets] * p.d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1) + b.center
        for x in pts:
            if float(np.linalg.norm(x - b.center)) >= b.radius:
                continue
            v, g = evaluate_potential(p, x)
            if abs(v - 1.0) < tol and float(np.linalg.norm(g)) < tol:
                hits.append(x)
    # deduplicate points shared by overlapping bump grids
    out: list[np.ndarray] = []
    for x in hits:
        if not any(np.allclose(x, y, atol=grid_step * 1e-9) for y in out):
            out.append(x)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Run-level knobs shared by the orchestrator and the solvers."""

    dimension: int = 2
    scenario: str = "unnamed"
    h_grid: tuple = (0.1, 0.05, 0.02, 0.01)
    seed: int = 0
    escape_radius: float | None = None  # default: support_radius + 2
    max_flow_time: float = 200.0
    flow_rtol: float = 1e-12
    flow_atol: float = 1e-12
    energy_tol: float = 1e-8
    unitarity_tol_radial: float = 1e-10
    unitarity_tol_general: float = 1e-6
    fixed_point_eps: tuple = (0.1, 0.03, 0.01)
    extra: dict = field(default_factory=dict)

    def validate(self, support_radius: float) -> None:
        hs = tuple(self.h_grid)
        if any(h <= 0 for h in hs):
            raise ConfigError("h grid entries must be positive")
        if any(a <= b for a, b in zip(hs, hs[1:])):
            raise ConfigError("h grid must be strictly decreasing")
        if self.max_flow_time <= 0:
            raise ConfigError("max flow time must be positive")
        if self.escape_radius is not None and self.escape_radius <= support_radius + 1:
            raise ConfigError("escape radius must exceed support radius + 1")
