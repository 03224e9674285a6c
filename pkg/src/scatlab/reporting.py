"""Deterministic result files: CSV, JSON, SVG histograms, run manifest.

Reports never contain timestamps (those live in the manifest) and all
floats are written with shortest round-trip repr, so a rerun with the
same configuration and seed reproduces every report byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__

CSV_SCHEMA = "scatlab.report/1"
JSON_SCHEMA = "scatlab.report/1"
MANIFEST_SCHEMA = "scatlab.manifest/1"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, complex):
        sign = "+" if value.imag >= 0 else ""
        return f"{value.real!r}{sign}{value.imag!r}j"
    return str(value)


def write_csv(path, columns, rows, schema: str = CSV_SCHEMA) -> Path:
    path = Path(path)
    lines = [f"# schema={schema}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, payload: dict, schema: str = JSON_SCHEMA) -> Path:
    path = Path(path)
    doc = {"schema_version": schema}
    doc.update(_jsonable(payload))
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return path


def phase_histogram_svg(path, phases, h: float, scenario: str, n_bins: int = 64) -> Path:
    """Fixed-layout histogram of eigenphases over (-pi, pi].

    Hand-rolled SVG: the plot is a static artifact, deterministic down
    to the byte, with per-bin counts annotated above nonzero bars.
    """
    path = Path(path)
    phases = np.asarray(phases, dtype=float)
    edges = np.linspace(-math.pi, math.pi, n_bins + 1)
    shifted = np.where(phases <= -math.pi, phases + 2.0 * math.pi, phases)
    counts, _ = np.histogram(shifted, bins=edges)
    width, height = 960, 360
    margin_l, margin_b, margin_t = 50, 30, 24
    plot_w = width - margin_l - 10
    plot_h = height - margin_b - margin_t
    peak = max(int(counts.max()), 1)
    bar_w = plot_w / n_bins

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin_l}" y="16" font-family="monospace" font-size="13">'
        f"eigenphase histogram: scenario={scenario} h={_fmt(h)} n={phases.size} bins={n_bins}</text>",
        f'<line x1="{margin_l}" y1="{height - margin_b}" x2="{width - 10}" '
        f'y2="{height - margin_b}" stroke="black"/>',
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" '
        f'y2="{height - margin_b}" stroke="black"/>',
    ]
    for i, c in enumerate(counts):
        x = margin_l + i * bar_w
        bh = plot_h * (int(c) / peak)
        y = height - margin_b - bh
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w - 1:.2f}" height="{bh:.2f}" '
            f'fill="#4878a8"/>'
        )
        if c > 0:
            parts.append(
                f'<text x="{x + 0.5 * bar_w:.2f}" y="{y - 3:.2f}" font-family="monospace" '
                f'font-size="9" text-anchor="middle">{int(c)}</text>'
            )
    for frac, label in ((0.0, "-pi"), (0.25, "-pi/2"), (0.5, "0"), (0.75, "pi/2"), (1.0, "pi")):
        x = margin_l + frac * plot_w
        parts.append(
            f'<text x="{x:.2f}" y="{height - 12}" font-family="monospace" font-size="11" '
            f'text-anchor="middle">{label}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path


@dataclass
class RunManifest:
    """Provenance of one CLI invocation; the only output with timestamps."""

    scenario: str
    subcommand: str
    config_digest: str
    seed: int
    kernel_impl: str
    started_at: str = ""
    finished_at: str = ""
    cache: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def start(self):
        self.started_at = datetime.now(timezone.utc).isoformat()
        return self

    def note_cache(self, stage: str, hit: bool):
        entry = self.cache.setdefault(stage, {"hits": 0, "misses": 0})
        entry["hits" if hit else "misses"] += 1

    def add_output(self, path):
        name = Path(path).name
        if name not in self.outputs:
            self.outputs.append(name)

    def finish(self, out_dir) -> Path:
        self.finished_at = datetime.now(timezone.utc).isoformat()
        payload = {
            "schema_version": MANIFEST_SCHEMA,
            "tool": "scatlab",
            "tool_version": __version__,
            "scenario": self.scenario,
            "subcommand": self.subcommand,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "kernel_impl": self.kernel_impl,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "cache": self.cache,
            "outputs": sorted(self.outputs),
        }
        path = Path(out_dir) / "manifest.json"
        path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
        return path


def format_h(h: float) -> str:
    return ("%g" % h)
