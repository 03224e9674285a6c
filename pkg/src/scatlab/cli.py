"""Command-line entry point.

    scatlab <subcommand> --config <path> [--preset NAME] [--seed N]
            [--out DIR] [--h H ...] [--workers N]

Subcommands: classical-map, volumes, smatrix, phases, equidist,
trace-check, nondegeneracy, transport, preset.  Every run writes
report.csv, report.json and manifest.json into the output directory;
phases/equidist additionally emit one SVG histogram per h.  Exit codes:
0 success, 2 configuration error, 3 numeric contract violation,
4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .config import Scenario, dump_config_ini, load_config
from .core import CotangentPoint, nondegeneracy_scan
from .dynamics import (
    Escaped,
    NonInteracting,
    Trapped,
    deflection_angle_radial,
    estimate_fixed_point_measure,
    estimate_interaction_volume,
    estimate_trapped_measure,
    sample_cotangent_points,
    scattering_map,
    symplectic_check,
)
from .errors import (
    ConfigError,
    NumericContractViolation,
    ResourceBudgetExceeded,
    ScatlabError,
)
from .presets import preset, preset_names
from .quantum.smatrix import assemble_general_smatrix, assemble_radial_smatrix, eigenphases
from .quantum.transport import identity_defect, wavepacket_transport_check
from .reporting import (
    RunManifest,
    format_h,
    phase_histogram_svg,
    write_csv,
    write_json,
)
from .stats import (
    IndicatorArc,
    TrigPoly,
    count_above_threshold,
    count_in_arc,
    equidistribution_report,
    mu_pairing,
    trace_powers,
)
from . import cache as smx_cache


def _resolve_scenario(args) -> Scenario:
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.preset:
        scen = Scenario(preset(args.preset))
    elif args.config:
        scen = load_config(args.config)
    else:
        raise ConfigError("a --config file or --preset name is required")
    if args.seed is not None:
        scen.data.setdefault("experiment", {})["seed"] = int(args.seed)
    if args.h:
        scen.data.setdefault("experiment", {})["h_grid"] = [float(x) for x in args.h]
    scen.experiment_config()  # validates
    return scen


def _obtain_smatrix(scen: Scenario, h: float, out_dir: Path, manifest: RunManifest, workers: int):
    p = scen.potential()
    policy = scen.truncation_policy()
    backend = scen.backend
    if backend == "auto":
        backend = "radial" if p.is_radial else "lippmann-schwinger"
    if backend == "radial":
        params = {"ode_rtol": scen.ode_rtol, "policy": vars(policy)}
    else:
        gp = scen.grid_policy()
        params = {
            "policy": vars(policy),
            "grid": {
                "points_per_wavelength": gp.points_per_wavelength,
                "min_cells_per_radius": gp.min_cells_per_radius,
                "correction_order": gp.correction_order,
            },
            "unitarity_tol": scen.unitarity_tol,
        }
    m_cut = policy.mode_cutoff(p.support_radius, h)
    key = smx_cache.smatrix_cache_key(p.to_record(), h, m_cut, backend, params)
    path = smx_cache.cache_path(out_dir / "cache", key)
    if path.exists():
        manifest.note_cache("smatrix", True)
        return smx_cache.load_smatrix(path), key, True
    manifest.note_cache("smatrix", False)
    if backend == "radial":
        s = assemble_radial_smatrix(p, h, policy, ode_rtol=scen.ode_rtol, workers=workers)
    else:
        s = assemble_general_smatrix(
            p, h, policy, scen.grid_policy(), unitarity_tol=scen.unitarity_tol
        )
    smx_cache.save_smatrix(out_dir / "cache", key, s, p.to_record(), params)
    return s, key, False


def cmd_classical_map(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    p = scen.potential()
    flow = scen.flow_settings()
    rows = []
    for theta, eta in scen.get("classical", "points", [[0.0, 0.3]]):
        q = CotangentPoint.from_chart(float(theta), float(eta))
        outct = scattering_map(q, p, flow)
        row = {
            "theta": float(theta),
            "eta": float(eta),
            "outcome": type(outct).__name__,
            "theta_out": "",
            "eta_out": "",
            "time_delay": "",
            "flight_time": "",
        }
        if isinstance(outct, Escaped):
            row.update(
                theta_out=outct.omega_out.theta,
                eta_out=outct.point.eta_signed,
                time_delay=outct.time_delay,
                flight_time=outct.flight_time,
            )
        elif isinstance(outct, NonInteracting):
            row.update(theta_out=float(theta), eta_out=float(eta), time_delay=0.0, flight_time=0.0)
        rows.append(row)
    # symplectic spot checks on random non-trapped samples
    n_sym = int(scen.get("classical", "n_symplectic", 20))
    delta = float(scen.get("classical", "symplectic_delta", 1e-4))
    sym_flow = scen.flow_settings()
    sym_rows = []
    samples = sample_cotangent_points(p.d, p.support_radius + 0.5, 4 * n_sym, scen.seed + 101)
    for q in samples:
        if len(sym_rows) >= n_sym:
            break
        try:
            det = symplectic_check(q, delta, p, sym_flow)
        except ScatlabError:
            continue
        sym_rows.append(
            {
                "theta": q.omega.theta,
                "eta": q.eta_signed,
                "jacobian_det": det,
                "abs_det_minus_1": abs(det - 1.0),
            }
        )
    write_csv(out / "report.csv", list(rows[0].keys()), rows)
    manifest.add_output(out / "report.csv")
    if sym_rows:
        write_csv(out / "symplectic.csv", list(sym_rows[0].keys()), sym_rows)
        manifest.add_output(out / "symplectic.csv")
    write_json(
        out / "report.json",
        {"scenario": scen.name, "map_points": rows, "symplectic": sym_rows},
    )
    manifest.add_output(out / "report.json")
    return 0


def cmd_volumes(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    p = scen.potential()
    flow = scen.flow_settings()
    seed = scen.seed
    R = scen.get("volumes", "sample_radius")
    R = float(R) if R is not None else p.support_radius + 0.5
    rows = []

    n_inter = int(scen.get("volumes", "n_interaction", 1000000))
    est = estimate_interaction_volume(p, R, n_inter, seed)
    rows.append(
        {
            "quantity": "interaction",
            "scenario": scen.name,
            "param": "",
            "R": R,
            "N": n_inter,
            "seed": seed,
            "mean": est.mean,
            "stderr": est.standard_error,
        }
    )

    n_trap = int(scen.get("volumes", "n_trapped", 20000))
    for t_max in scen.get("volumes", "t_max_grid", [50.0, 100.0, 200.0]):
        fl = scen.flow_settings()
        fl = type(fl)(**{**vars(fl), "t_max": float(t_max)})
        est = estimate_trapped_measure(p, R, n_trap, fl, seed, workers=workers)
        rows.append(
            {
                "quantity": "trapped",
                "scenario": scen.name,
                "param": f"t_max={format_h(float(t_max))}",
                "R": R,
                "N": n_trap,
                "seed": seed,
                "mean": est.mean,
                "stderr": est.standard_error,
            }
        )

    n_fp = int(scen.get("volumes", "n_fixed_point", 20000))
    eps_ladder = [float(e) for e in scen.get("volumes", "fixed_point_eps", [0.1, 0.03, 0.01])]
    for period in scen.get("volumes", "fixed_point_periods", [1, 2]):
        ests = estimate_fixed_point_measure(
            p, int(period), eps_ladder, R, n_fp, flow, seed, workers=workers
        )
        for eps in eps_ladder:
            est = ests[eps]
            rows.append(
                {
                    "quantity": "fixed-point",
                    "scenario": scen.name,
                    "param": f"l={int(period)},eps={format_h(eps)}",
                    "R": R,
                    "N": n_fp,
                    "seed": seed,
                    "mean": est.mean,
                    "stderr": est.standard_error,
                }
            )

    write_csv(out / "report.csv", list(rows[0].keys()), rows)
    write_json(out / "report.json", {"scenario": scen.name, "volumes": rows})
    manifest.add_output(out / "report.csv")
    manifest.add_output(out / "report.json")
    return 0


def cmd_smatrix(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    rows = []
    for h in scen.h_grid:
        s, key, hit = _obtain_smatrix(scen, h, out, manifest, workers)
        rows.append(
            {
                "h": h,
                "m_cut": s.m_cut,
                "dim": s.dim,
                "backend": s.backend,
                "unitarity_defect": s.unitarity_defect(),
                "off_diagonal_mass": s.off_diagonal_mass(),
                "cache_key": key,
                "cache_hit": hit,
            }
        )
    write_csv(out / "report.csv", list(rows[0].keys()), rows)
    write_json(out / "report.json", {"scenario": scen.name, "matrices": rows})
    manifest.add_output(out / "report.csv")
    manifest.add_output(out / "report.json")
    return 0


def cmd_phases(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    rows = []
    for h in scen.h_grid:
        s, _, _ = _obtain_smatrix(scen, h, out, manifest, workers)
        spec = eigenphases(s)
        svg = out / f"phases_h{format_h(h)}.svg"
        phase_histogram_svg(svg, spec.phases, h, scen.name)
        manifest.add_output(svg)
        for n, beta in enumerate(spec.phases):
            rows.append({"h": h, "n": n, "beta": float(beta), "gap": float(spec.gaps[n])})
    write_csv(out / "report.csv", ["h", "n", "beta", "gap"], rows)
    write_json(
        out / "report.json",
        {"scenario": scen.name, "count": len(rows)},
    )
    manifest.add_output(out / "report.csv")
    manifest.add_output(out / "report.json")
    return 0


def cmd_equidist(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    p = scen.potential()
    R = scen.get("volumes", "sample_radius")
    R = float(R) if R is not None else p.support_radius + 0.5
    n_inter = int(scen.get("volumes", "n_interaction", 1000000))
    vol = estimate_interaction_volume(p, R, n_inter, scen.seed)

    spectra = {}
    for h in scen.h_grid:
        s, _, _ = _obtain_smatrix(scen, h, out, manifest, workers)
        spectra[h] = eigenphases(s)
        svg = out / f"phases_h{format_h(h)}.svg"
        phase_histogram_svg(svg, spectra[h].phases, h, scen.name)
        manifest.add_output(svg)

    arcs = [IndicatorArc(a, b) for a, b in scen.arcs()]
    funcs = [TrigPoly.power_minus_one(k) for k in scen.trace_powers_list()]
    report = equidistribution_report(scen.name, spectra, arcs, funcs, vol, d=p.d)
    verdicts = report.verdicts()
    rows = [
        {**row, "converging": verdicts[row["test_id"]]}
        for row in report.rows
    ]
    cols = ["h", "test_id", "kind", "empirical", "limit", "abs_error", "converging"]
    write_csv(out / "report.csv", cols, rows)
    write_json(
        out / "report.json",
        {
            "scenario": scen.name,
            "vol_interaction": {"mean": vol.mean, "stderr": vol.standard_error},
            "rows": rows,
            "verdicts": verdicts,
        },
    )
    manifest.add_output(out / "report.csv")
    manifest.add_output(out / "report.json")
    return 0


def cmd_trace_check(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    p = scen.potential()
    R = scen.get("volumes", "sample_radius")
    R = float(R) if R is not None else p.support_radius + 0.5
    vol = estimate_interaction_volume(
        p, R, int(scen.get("volumes", "n_interaction", 1000000)), scen.seed
    )
    rows = []
    for h in scen.h_grid:
        s, _, _ = _obtain_smatrix(scen, h, out, manifest, workers)
        spec = eigenphases(s)
        for k in scen.trace_powers_list():
            tr = (2.0 * math.pi * h) ** (p.d - 1) * trace_powers(spec, k)
            err = abs(tr + vol.mean)
            rows.append(
                {
                    "h": h,
                    "k": k,
                    "value_re": tr.real,
                    "value_im": tr.imag,
                    "target": -vol.mean,
                    "abs_error": err,
                    "rel_error": err / vol.mean if vol.mean else math.inf,
                }
            )
        for L in scen.count_thresholds():
            rows.append(
                {
                    "h": h,
                    "k": f"count_L={format_h(L)}",
                    "value_re": count_above_threshold(spec, L, h),
                    "value_im": 0.0,
                    "target": "",
                    "abs_error": "",
                    "rel_error": "",
                }
            )
    cols = ["h", "k", "value_re", "value_im", "target", "abs_error", "rel_error"]
    write_csv(out / "report.csv", cols, rows)
    write_json(
        out / "report.json",
        {
            "scenario": scen.name,
            "vol_interaction": {"mean": vol.mean, "stderr": vol.standard_error},
            "rows": rows,
        },
    )
    manifest.add_output(out / "report.csv")
    manifest.add_output(out / "report.json")
    return 0


def cmd_nondegeneracy(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    p = scen.potential()
    step = float(scen.get("nondegeneracy", "grid_step", 0.02))
    tol = float(scen.get("nondegeneracy", "tol", 0.001))
    hits = nondegeneracy_scan(p, step, tol)
    rows = [
        {"index": i, **{f"x{j}": float(x[j]) for j in range(p.d)}} for i, x in enumerate(hits)
    ]
    cols = ["index"] + [f"x{j}" for j in range(p.d)]
    write_csv(out / "report.csv", cols, rows)
    write_json(
        out / "report.json",
        {
            "scenario": scen.name,
            "grid_step": step,
            "tol": tol,
            "degenerate_points": len(rows),
            "certified_nondegenerate": len(rows) == 0,
        },
    )
    manifest.add_output(out / "report.csv")
    manifest.add_output(out / "report.json")
    return 0


def cmd_transport(scen: Scenario, out: Path, manifest: RunManifest, workers: int) -> int:
    p = scen.potential()
    flow = scen.flow_settings()
    theta0 = float(scen.get("transport", "theta0", 1.0))
    eta0 = float(scen.get("transport", "eta0", 0.3))
    hs = scen.get("transport", "h_grid", list(scen.h_grid))
    if isinstance(hs, (int, float)):
        hs = [hs]
    rows = []
    for h in [float(x) for x in hs]:
        sub = Scenario(json.loads(json.dumps(scen.data)))
        sub.data.setdefault("experiment", {})["h_grid"] = [h]
        s, _, _ = _obtain_smatrix(sub, h, out, manifest, workers)
        rep = wavepacket_transport_check(s, theta0, eta0, p, flow)
        outside_eta = p.support_radius + 1.0 + 3.0 * math.sqrt(h)
        rows.append(
            {
                "h": h,
                "theta0": theta0,
                "eta0": eta0,
                "theta_out": rep.center_out[0],
                "eta_out": rep.center_out[1],
                "theta_classical": rep.classical_image[0],
                "eta_classical": rep.classical_image[1],
                "center_error": rep.center_error,
                "error_over_sqrt_h": rep.center_error / math.sqrt(h),
                "mass_defect": rep.mass_defect,
                "identity_defect_off_region": identity_defect(s, theta0, min(outside_eta, s.m_cut * s.h)),
            }
        )
    cols = list(rows[0].keys())
    write_csv(out / "report.csv", cols, rows)
    write_json(out / "report.json", {"scenario": scen.name, "rows": rows})
    manifest.add_output(out / "report.csv")
    manifest.add_output(out / "report.json")
    return 0


def cmd_preset(args) -> int:
    data = preset(args.name)
    text = dump_config_ini(data)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "classical-map": cmd_classical_map,
    "volumes": cmd_volumes,
    "smatrix": cmd_smatrix,
    "phases": cmd_phases,
    "equidist": cmd_equidist,
    "trace-check": cmd_trace_check,
    "nondegeneracy": cmd_nondegeneracy,
    "transport": cmd_transport,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scatlab",
        description="semiclassical scattering laboratory: S-matrices, eigenphase "
        "statistics, classical scattering dynamics",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI or JSON scenario file")
        sp.add_argument("--preset", choices=preset_names(), help="built-in scenario")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output directory (default runs/<scenario>-<cmd>)")
        sp.add_argument("--h", nargs="*", default=None, help="override the h grid")
        sp.add_argument("--workers", type=int, default=1)
    sp = sub.add_parser("preset", help="print or write a preset config")
    sp.add_argument("name", choices=preset_names())
    sp.add_argument("--output", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "preset":
        return cmd_preset(args)
    try:
        scen = _resolve_scenario(args)
        out = Path(args.out) if args.out else Path("runs") / f"{scen.name}-{args.subcommand}"
        out.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(
            scenario=scen.name,
            subcommand=args.subcommand,
            config_digest=scen.digest(),
            seed=scen.seed,
            kernel_impl=kernels.IMPL_NAME,
        ).start()
        code = _COMMANDS[args.subcommand](scen, out, manifest, max(1, args.workers))
        manifest.finish(out)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericContractViolation as exc:
        print(f"numeric contract violation: {exc}", file=sys.stderr)
        return 3
    except ResourceBudgetExceeded as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
