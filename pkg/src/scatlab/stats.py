"""Eigenphase statistics: the rescaled counting measure, arc counts,
trace sums, threshold counts and log-weighted norms.

The central object is the pairing

    <mu_h, f> = (2 pi h)^{d-1} sum_n f(e^{i beta_n}),

finite whenever f vanishes at z = 1 (the phases accumulate there).  In
the semiclassical limit it converges to Vol(I)/(2 pi) * int f, which
the report generator checks over decreasing h grids against the
Monte-Carlo interaction volume.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import MeasureEstimate
from .errors import BadArc, FunctionNotVanishingAtOne, NonConvergent
from .quantum.smatrix import PhaseSpectrum, ScatteringMatrix, eigenphases


@dataclass(frozen=True)
class TrigPoly:
    """p(z) = sum a_k z^k with sum a_k = 0, so p(1) = 0 by construction."""

    coefficients: dict  # k -> a_k, k in [-N, N]
    label: str = "trig-poly"

    def __post_init__(self):
        total = sum(self.coefficients.values())
        if abs(total) > 1e-12:
            raise FunctionNotVanishingAtOne(f"coefficients sum to {total}, expected 0")

    def __call__(self, z: complex) -> complex:
        return sum(a * z**k for k, a in self.coefficients.items())

    def circle_integral(self) -> complex:
        """int_0^{2 pi} p(e^{i t}) dt = 2 pi a_0."""
        return 2.0 * math.pi * self.coefficients.get(0, 0.0)

    @staticmethod
    def power_minus_one(k: int) -> "TrigPoly":
        return TrigPoly({k: 1.0, 0: -1.0}, label=f"z^{k}-1")


@dataclass(frozen=True)
class IndicatorArc:
    """Indicator of the arc {e^{i t}: phi1 <= t <= phi2}, 0 < phi1 < phi2 < 2 pi."""

    phi1: float
    phi2: float
    label: str = ""

    def __post_init__(self):
        if not (0.0 < self.phi1 < self.phi2 < 2.0 * math.pi):
            raise BadArc(f"need 0 < {self.phi1} < {self.phi2} < 2*pi")
        if not self.label:
            object.__setattr__(self, "label", f"arc[{self.phi1:.4f},{self.phi2:.4f}]")

    def __call__(self, z: complex) -> float:
        t = cmath.phase(z) % (2.0 * math.pi)
        return 1.0 if self.phi1 <= t <= self.phi2 else 0.0

    def circle_integral(self) -> float:
        return self.phi2 - self.phi1


@dataclass(frozen=True)
class LogWeighted:
    """Wrapper for functions with finite sup |log|z-1||^alpha |f(z)|."""

    fn: object  # callable on the unit circle
    alpha: float
    label: str = "log-weighted"

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def __call__(self, z: complex):
        return self.fn(z)


def _check_vanishes_at_one(f, tol: float = 1e-6) -> None:
    probe = max(abs(complex(f(cmath.exp(1j * t)))) for t in (1e-9, -1e-9, 1e-12))
    if probe > tol:
        raise FunctionNotVanishingAtOne(f"|f| = {probe:.3e} next to z = 1")


def mu_pairing(spec: PhaseSpectrum, f, d: int = 2) -> complex:
    """(2 pi h)^{d-1} sum_n f(e^{i beta_n}) over the truncated spectrum."""
    if not isinstance(f, (TrigPoly, IndicatorArc)):
        _check_vanishes_at_one(f)
    scale = (2.0 * math.pi * spec.h) ** (d - 1)
    total = 0.0 + 0.0j
    for beta in spec.phases:
        total += f(cmath.exp(1j * float(beta)))
    return scale * total


def count_in_arc(spec: PhaseSpectrum, phi1: float, phi2: float) -> int:
    """Number of eigenphases with phi1 <= beta <= phi2 modulo 2 pi."""
    if not (0.0 < phi1 < phi2 < 2.0 * math.pi):
        raise BadArc(f"need 0 < {phi1} < {phi2} < 2*pi")
    t = np.mod(spec.phases, 2.0 * math.pi)
    return int(np.count_nonzero((t >= phi1) & (t <= phi2)))


def trace_powers(source, k: int) -> complex:
    """sum_n (lambda_n^k - 1) from the eigenphase spectrum."""
    if k == 0:
        raise ValueError("power must be nonzero")
    spec = eigenphases(source) if isinstance(source, ScatteringMatrix) else source
    return complex(np.sum(np.exp(1j * k * spec.phases) - 1.0))


def trace_powers_direct(s: ScatteringMatrix, k: int) -> complex:
    """Independent route: trace of the explicit matrix power minus the
    identity; negative powers use the conjugate transpose."""
    if k == 0:
        raise ValueError("power must be nonzero")
    base = s.entries if k > 0 else s.entries.conj().T
    acc = np.eye(s.dim, dtype=complex)
    for _ in range(abs(k)):
        acc = acc @ base
    return complex(np.trace(acc) - s.dim)


def count_above_threshold(spec: PhaseSpectrum, L: float, h: float) -> int:
    """Number of phases with |e^{i beta} - 1| >= exp(-L/h).

    Compared in log space: exp(-L/h) underflows doubles long before the
    counts it controls stop mattering.
    """
    if L < 1.0:
        raise ValueError("threshold parameter L must be >= 1")
    gaps = spec.gaps
    log_thr = -L / h
    count = 0
    for g in gaps:
        if g > 0.0 and math.log(g) >= log_thr:
            count += 1
    return count


def holder_log_norm(
    f: LogWeighted,
    base_resolution: int = 512,
    max_levels: int = 40,
    stall_tol: float = 0.01,
) -> tuple[float, int]:
    """sup over the circle of |log|z-1||^alpha |f(z)| by geometric
    refinement toward z = 1.

    Returns (norm, level at which two successive levels agreed within
    1%).  Raises NonConvergent when the sup keeps growing over five
    successive refinements: the weight diverges at 1 faster than f
    decays, so f is outside the space.
    """
    alpha = f.alpha
    base = [(j + 0.5) * 2.0 * math.pi / base_resolution for j in range(base_resolution)]

    def weighted(phi: float) -> float:
        z = cmath.exp(1j * phi)
        w = abs(z - 1.0)
        if w == 0.0:
            return 0.0
        return abs(math.log(w)) ** alpha * abs(complex(f(z)))

    sup_prev = None
    growth_streak = 0
    shells_per_level = 4
    sup_base = max(weighted(phi) for phi in base)
    sup = sup_base
    for level in range(1, max_levels + 1):
        jmax = 4 + shells_per_level * level
        for j in range(4 + shells_per_level * (level - 1), jmax):
            for t in range(16):
                phi = math.pi * 2.0 ** (-j) * (1.0 + t / 16.0)
                sup = max(sup, weighted(phi), weighted(-phi))
        if sup_prev is not None:
            if sup > sup_prev * (1.0 + 1e-9):
                growth_streak += 1
                if growth_streak >= 5:
                    raise NonConvergent(
                        f"weighted sup still growing at level {level}: {sup:.6e}"
                    )
            else:
                growth_streak = 0
            if abs(sup - sup_prev) <= stall_tol * max(sup, 1e-300):
                return sup, level
        sup_prev = sup
    return sup, max_levels


def decreasing_errors(errors) -> bool:
    """Convergence verdict for an error sequence along a decreasing h
    grid: final error at most half the initial one and no step grows by
    more than 10%."""
    errs = [abs(e) for e in errors]
    if len(errs) < 2:
        return True
    if errs[-1] > 0.5 * errs[0]:
        return False
    return all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))


@dataclass
class EquidistReport:
    """Rows of empirical-vs-limit values for arcs and test functions
    over an h grid, plus the interaction volume used for the limits."""

    scenario: str
    vol_interaction: MeasureEstimate
    rows: list = field(default_factory=list)

    def add_row(self, h: float, test_id: str, kind: str, empirical: float, limit: float):
        self.rows.append(
            {
                "h": h,
                "test_id": test_id,
                "kind": kind,
                "empirical": empirical,
                "limit": limit,
                "abs_error": abs(empirical - limit),
            }
        )

    def verdicts(self) -> dict:
        """Per-test convergence verdict along the h grid (h decreasing)."""
        by_test: dict = {}
        for row in self.rows:
            by_test.setdefault(row["test_id"], []).append((row["h"], row["abs_error"]))
        out = {}
        for test_id, pairs in by_test.items():
            pairs.sort(key=lambda he: -he[0])
            out[test_id] = decreasing_errors([e for _, e in pairs])
        return out


def equidistribution_report(
    scenario: str,
    spectra: dict,
    arcs,
    functions,
    vol_estimate: MeasureEstimate,
    d: int = 2,
) -> EquidistReport:
    """Empirical pairings and arc counts against their equidistribution
    limits Vol(I) * (arc length or integral) / (2 pi)."""
    report = EquidistReport(scenario=scenario, vol_interaction=vol_estimate)
    vol = vol_estimate.mean
    for h in sorted(spectra.keys(), reverse=True):
        spec = spectra[h]
        scale = (2.0 * math.pi * h) ** (d - 1)
        for arc in arcs:
            limit = vol * arc.circle_integral() / (2.0 * math.pi)
            empirical = scale * count_in_arc(spec, arc.phi1, arc.phi2)
            report.add_row(h, arc.label, "arc-count", empirical, limit)
        for fn in functions:
            limit_integral = _circle_integral(fn)
            limit = vol * limit_integral / (2.0 * math.pi)
            empirical = mu_pairing(spec, fn, d)
            report.add_row(h, fn.label, "pairing", _real(empirical), _real(limit))
    return report


def _circle_integral(fn) -> complex:
    if hasattr(fn, "circle_integral"):
        return fn.circle_integral()
    n = 16384
    total = 0.0 + 0.0j
    for j in range(n):
        t = (j + 0.5) * 2.0 * math.pi / n
        total += complex(fn(cmath.exp(1j * t)))
    return total * (2.0 * math.pi / n)


def _real(z) -> float:
    return float(z.real) if isinstance(z, complex) else float(z)
