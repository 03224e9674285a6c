"""Benchmark: compiled extension vs pure-Python kernels.

Times the two hot loops (trajectory propagation through the two-bump
scenario, radial wave sweeps for the partial-wave backend) on both
implementations and reports the speedup plus a cross-implementation
consistency check.

    python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from scatlab.kernels import pure

try:
    from scatlab.kernels import _ck as compiled
except ImportError:
    compiled = None


TWO_BUMPS = [(1.25, 0.0, 2.0, 0.5), (-1.25, 0.0, 2.0, 0.5)]


def _flow_batch(impl, samples):
    worst_status = 0
    acc = 0.0
    for x0, xi0 in samples:
        x, xi, t, drift, status, nsteps = impl.flow_propagate(
            x0, xi0, TWO_BUMPS, 3.75, 50.0, 1e-12, 1e-12
        )
        worst_status = max(worst_status, status)
        acc += t
    return acc, worst_status


def _radial_batch(impl, orders, h):
    acc = 0.0
    for m in orders:
        mt = m + 0.5
        r_start = max(1e-6, mt * h * math.exp(-50.0 / mt))
        u, up, logscale, status, nsteps = impl.radial_propagate(
            float(m), h, 0.5, 1.0, r_start, 1.1, 1.0, mt / r_start, 1e-11, 0.0
        )
        acc += math.atan2(up, u)
    return acc


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    n_traj = 80 if args.quick else 400
    h_rad = 0.05 if args.quick else 0.02

    rng = np.random.default_rng(42)
    samples = []
    for _ in range(n_traj):
        th = rng.uniform(0.0, 2.0 * math.pi)
        eta = rng.uniform(-1.6, 1.6)
        om = [math.cos(th), math.sin(th)]
        perp = [om[1], -om[0]]
        samples.append(
            ([eta * perp[0] - 4.0 * om[0], eta * perp[1] - 4.0 * om[1]], list(om))
        )
    orders = list(range(int(math.ceil(1.5 / h_rad)) + 10))

    impls = [("pure", pure)]
    if compiled is not None:
        impls.append(("compiled", compiled))
    else:
        print("compiled extension not available; timing pure only")

    results = {}
    print(f"trajectory batch: {n_traj} two-bump scattering passes")
    for name, impl in impls:
        t0 = time.perf_counter()
        acc, status = _flow_batch(impl, samples)
        dt = time.perf_counter() - t0
        results[("flow", name)] = (dt, acc)
        print(f"  {name:9s} {dt:8.3f} s   (checksum {acc:.6f}, worst status {status})")

    print(f"radial sweep: {len(orders)} channels at h={h_rad}")
    for name, impl in impls:
        t0 = time.perf_counter()
        acc = _radial_batch(impl, orders, h_rad)
        dt = time.perf_counter() - t0
        results[("radial", name)] = (dt, acc)
        print(f"  {name:9s} {dt:8.3f} s   (checksum {acc:.6f})")

    if compiled is not None:
        for task in ("flow", "radial"):
            tp, cp = results[(task, "pure")], results[(task, "compiled")]
            # last-bit differences get amplified through bouncing orbits,
            # so the gate is consistency, not bit identity
            agree = abs(tp[1] - cp[1]) <= 1e-4 * max(1.0, abs(tp[1]))
            print(
                f"{task}: speedup {tp[0] / cp[0]:6.1f}x, "
                f"cross-implementation checksums {'consistent' if agree else 'DISAGREE'}"
            )


if __name__ == "__main__":
    main()
