"""Experiment configuration: flat INI-style files with a JSON mirror.

A config is a nested {section: {key: value}} dictionary.  The INI form
is the diffable on-disk format; values are parsed as JSON fragments
when possible (so lists and numbers work) and kept as strings
otherwise.  Every numeric knob that can influence an output is part of
the canonical digest.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .core import ExperimentConfig, PotentialSpec
from .dynamics import FlowSettings
from .errors import ConfigError
from .quantum.lippmann import GridPolicy
from .quantum.smatrix import TruncationPolicy
from .util import digest_of


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        parts = raw.split()
        if len(parts) > 1:
            try:
                return [json.loads(p) for p in parts]
            except json.JSONDecodeError:
                return raw
        return raw


def load_config(path) -> "Scenario":
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}") from exc
    else:
        parser = configparser.ConfigParser()
        try:
            parser.read_string(path.read_text())
        except configparser.Error as exc:
            raise ConfigError(f"bad config file: {exc}") from exc
        data = {
            section: {k: _parse_value(v) for k, v in parser.items(section)}
            for section in parser.sections()
        }
    return Scenario(data)


def dump_config_ini(data: dict) -> str:
    lines = []
    for section in sorted(data):
        lines.append(f"[{section}]")
        for key in sorted(data[section]):
            val = data[section][key]
            if isinstance(val, (list, dict)):
                lines.append(f"{key} = {json.dumps(val)}")
            else:
                lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)


@dataclass
class Scenario:
    """Typed access over the raw config mapping, with defaults."""

    data: dict

    def get(self, section: str, key: str, default=None):
        return self.data.get(section, {}).get(key, default)

    def require(self, section: str, key: str):
        val = self.get(section, key)
        if val is None:
            raise ConfigError(f"missing config key [{section}] {key}")
        return val

    # -- derived objects -------------------------------------------------

    @property
    def name(self) -> str:
        return str(self.get("experiment", "scenario", "unnamed"))

    @property
    def seed(self) -> int:
        return int(self.get("experiment", "seed", 0))

    @property
    def dimension(self) -> int:
        return int(self.get("experiment", "dimension", 2))

    @property
    def h_grid(self) -> tuple:
        hs = self.get("experiment", "h_grid", [0.1, 0.05, 0.02, 0.01])
        if isinstance(hs, (int, float)):
            hs = [hs]
        hs = tuple(float(h) for h in hs)
        if any(h <= 0 for h in hs) or any(a <= b for a, b in zip(hs, hs[1:])):
            raise ConfigError("h_grid must be positive and strictly decreasing")
        return hs

    def potential(self) -> PotentialSpec:
        sec = self.data.get("potential")
        if not sec:
            raise ConfigError("missing [potential] section")
        try:
            rec = dict(sec)
            rec.setdefault("d", self.dimension)
            return PotentialSpec.from_record(rec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad potential: {exc}") from exc

    def flow_settings(self) -> FlowSettings:
        p = self.potential()
        esc = self.get("flow", "escape_radius")
        esc = float(esc) if esc is not None else p.support_radius + 2.0
        if esc <= p.support_radius + 1.0:
            raise ConfigError("escape_radius must exceed support radius + 1")
        t_max = float(self.get("flow", "t_max", 200.0))
        if t_max <= 0:
            raise ConfigError("t_max must be positive")
        return FlowSettings(
            rtol=float(self.get("flow", "rtol", 1e-12)),
            atol=float(self.get("flow", "atol", 1e-12)),
            escape_radius=esc,
            t_max=t_max,
            energy_tol=float(self.get("flow", "energy_tol", 1e-8)),
        )

    def truncation_policy(self) -> TruncationPolicy:
        return TruncationPolicy(
            margin=float(self.get("truncation", "margin", 0.5)),
            pad_coefficient=float(self.get("truncation", "pad_coefficient", 3.0)),
            pad_constant=int(self.get("truncation", "pad_constant", 10)),
        )

    def grid_policy(self) -> GridPolicy:
        return GridPolicy(
            points_per_wavelength=float(self.get("smatrix", "points_per_wavelength", 16.0)),
            min_cells_per_radius=int(self.get("smatrix", "min_cells_per_radius", 8)),
            correction_order=int(self.get("smatrix", "correction_order", 2)),
            memory_cap_mb=float(self.get("smatrix", "memory_cap_mb", 1024.0)),
        )

    @property
    def backend(self) -> str:
        val = str(self.get("smatrix", "backend", "auto"))
        if val not in ("auto", "radial", "lippmann-schwinger"):
            raise ConfigError(f"unknown backend {val!r}")
        return val

    @property
    def ode_rtol(self) -> float:
        return float(self.get("smatrix", "ode_rtol", 1e-11))

    @property
    def unitarity_tol(self) -> float:
        return float(self.get("smatrix", "unitarity_tol", 1e-6))

    def arcs(self) -> list:
        raw = self.get(
            "stats", "arcs", [[0.5 * math.pi, 1.5 * math.pi], [0.25 * math.pi, 1.75 * math.pi]]
        )
        if raw and isinstance(raw[0], (int, float)):
            raw = [raw]
        return [(float(a), float(b)) for a, b in raw]

    def trace_powers_list(self) -> list:
        raw = self.get("stats", "trace_powers", [1, 2, 3])
        if isinstance(raw, (int, float)):
            raw = [raw]
        return [int(k) for k in raw]

    def count_thresholds(self) -> list:
        raw = self.get("stats", "count_l", [1.0, 2.0, 4.0])
        if isinstance(raw, (int, float)):
            raw = [raw]
        return [float(x) for x in raw]

    def experiment_config(self) -> ExperimentConfig:
        cfg = ExperimentConfig(
            dimension=self.dimension,
            scenario=self.name,
            h_grid=self.h_grid,
            seed=self.seed,
        )
        cfg.validate(self.potential().support_radius)
        return cfg

    def canonical(self) -> dict:
        return json.loads(json.dumps(self.data, sort_keys=True))

    def digest(self) -> str:
        return digest_of(self.canonical())
