"""Built-in scenario presets.

free: no potential, every statistic vanishes.
radial-bump: single centred bump, amplitude 0.5 (the workhorse).
radial-well: same geometry, attractive.
two-bump-trapping: two over-unit bumps with a bouncing orbit between
    them; the trapped set is nonempty but Liouville-null.
degenerate-bump: amplitude exactly 1, so the energy layer degenerates
    at the centre and the non-degeneracy scan must flag it.
"""

from __future__ import annotations

import copy

from .errors import UnknownPreset

_BASE = {
    "experiment": {
        "scenario": "",
        "dimension": 2,
        "seed": 1,
        "h_grid": [0.1, 0.05, 0.02, 0.01],
    },
    "flow": {
        "rtol": 1e-12,
        "atol": 1e-12,
        "t_max": 200.0,
        "energy_tol": 1e-8,
    },
    "volumes": {
        "sample_radius": None,  # default support_radius + 0.5
        "n_interaction": 1000000,
        "n_trapped": 20000,
        "n_fixed_point": 20000,
        "t_max_grid": [50.0, 100.0, 200.0],
        "fixed_point_eps": [0.1, 0.03, 0.01],
        "fixed_point_periods": [1, 2],
    },
    "smatrix": {
        "backend": "auto",
        "ode_rtol": 1e-11,
        "points_per_wavelength": 16.0,
        "correction_order": 2,
        "memory_cap_mb": 1024.0,
        "unitarity_tol": 1e-6,
    },
    "truncation": {"margin": 0.5, "pad_coefficient": 3.0, "pad_constant": 10},
    "stats": {
        "arcs": [
            [1.5707963267948966, 4.71238898038469],
            [0.7853981633974483, 5.497787143782138],
        ],
        "trace_powers": [1, 2, 3],
        "count_l": [1.0, 2.0, 4.0],
    },
    "transport": {"theta0": 1.0, "eta0": 0.3, "h_grid": [0.2, 0.1, 0.05]},
    "classical": {
        "points": [[0.0, 0.3], [1.0, 0.7], [2.5, -0.45]],
        "n_symplectic": 20,
        "symplectic_delta": 1e-4,
        "symplectic_rtol": 1e-10,
    },
    "nondegeneracy": {"grid_step": 0.02, "tol": 0.001},
}

_PRESETS = {
    "free": {"potential": {"kind": "zero"}},
    "radial-bump": {"potential": {"kind": "radial-bump", "amplitude": 0.5, "radius": 1.0}},
    "radial-well": {"potential": {"kind": "radial-bump", "amplitude": -0.5, "radius": 1.0}},
    "two-bump-trapping": {
        "potential": {
            "kind": "bump-sum",
            "bumps": [
                {"center": [1.25, 0.0], "amplitude": 2.0, "radius": 0.5},
                {"center": [-1.25, 0.0], "amplitude": 2.0, "radius": 0.5},
            ],
        },
        # over-unit bumps exclude the partial-wave backend; keep the
        # volume solver affordable
        "experiment": {"h_grid": [0.2]},
        "smatrix": {"backend": "lippmann-schwinger"},
    },
    "degenerate-bump": {"potential": {"kind": "radial-bump", "amplitude": 1.0, "radius": 1.0}},
}


def preset_names() -> list:
    return sorted(_PRESETS)


def preset(name: str) -> dict:
    """Config mapping for a named preset."""
    if name not in _PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; have {', '.join(preset_names())}")
    data = copy.deepcopy(_BASE)
    for section, content in _PRESETS[name].items():
        data.setdefault(section, {}).update(copy.deepcopy(content))
    data["experiment"]["scenario"] = name
    if data["volumes"]["sample_radius"] is None:
        del data["volumes"]["sample_radius"]
    return data
