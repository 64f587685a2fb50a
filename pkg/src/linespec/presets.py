"""Named experiment presets.

The *_full presets mirror the benchmark grids at 50 trials per cell and
take hours of CPU; the *_reduced presets keep a few representative cells
at 20 trials and finish on a desk machine. Preset dictionaries run
through the same strict parser as user config files.
"""

from __future__ import annotations

from .errors import ConfigError
from .fileio import parse_experiment_config

_G1_POLES = [{"modulus": 0.58, "phase": 2.0, "multiplicity": 20}]
_G2_POLES = [
    {"modulus": 0.58, "phase": 1.7, "multiplicity": 10},
    {"modulus": 0.58, "phase": 3.3, "multiplicity": 10},
]


def _theta_grid(start: float, stop: float, step: float) -> list[float]:
    grid = []
    t = start
    while t <= stop + 1e-9:
        grid.append(round(t, 10))
        t += step
    return grid


PRESETS: dict[str, dict] = {
    "fig3a-reduced": {
        "name": "fig3a-reduced",
        "L": 117, "m": 3, "layout": "three_spaced",
        "theta0_grid": [1.9, 2.1, 3.5],
        "snr_db_grid": [-3.0, 6.0],
        "trials": 20, "base_seed": 31, "amplitude_modulus": 1.0,
        "methods": [{"method": "manm", "filter_poles": _G1_POLES}],
    },
    "fig3a-full": {
        "name": "fig3a-full",
        "L": 117, "m": 3, "layout": "three_spaced",
        "theta0_grid": _theta_grid(1.1, 3.9, 0.2),
        "snr_db_grid": [-3.0, 0.0, 3.0, 6.0],
        "trials": 50, "base_seed": 31, "amplitude_modulus": 1.0,
        "methods": [{"method": "manm", "filter_poles": _G1_POLES}],
    },
    "fig3b-full": {
        "name": "fig3b-full",
        "L": 117, "m": 3, "layout": "three_spaced",
        "theta0_grid": _theta_grid(1.1, 3.9, 0.2),
        "snr_db_grid": [-3.0, 0.0, 3.0, 6.0],
        "trials": 50, "base_seed": 32, "amplitude_modulus": 1.0,
        "methods": [{"method": "manm", "filter_poles": _G2_POLES}],
    },
    "fig45-full": {
        "name": "fig45-full",
        "L": 117, "m": 3, "layout": "three_spaced",
        "theta0_grid": _theta_grid(1.5, 2.5, 0.1),
        "snr_db_grid": [-3.0, 0.0, 3.0, 6.0],
        "trials": 50, "base_seed": 31, "amplitude_modulus": 1.0,
        "methods": [{"method": "manm", "filter_poles": _G1_POLES}],
    },
    "fig6a-reduced": {
        "name": "fig6a-reduced",
        "L": 117, "m": 2, "layout": "two_close",
        "theta0_grid": [1.9, 2.1],
        "snr_db_grid": [-3.0],
        "trials": 20, "base_seed": 61, "amplitude_modulus": 2.0,
        "methods": [
            {"method": "manm", "filter_poles": _G1_POLES},
            {"method": "sanm", "filter_poles": _G1_POLES},
        ],
    },
    "fig6-full": {
        "name": "fig6-full",
        "L": 117, "m": 2, "layout": "two_close",
        "theta0_grid": _theta_grid(1.5, 2.5, 0.1),
        "snr_db_grid": [-3.0, 0.0, 3.0, 6.0],
        "trials": 50, "base_seed": 61, "amplitude_modulus": 2.0,
        "methods": [
            {"method": "manm", "filter_poles": _G1_POLES},
            {"method": "sanm", "filter_poles": _G1_POLES},
            {"method": "standard_anm"},
        ],
    },
}


def get_preset(name: str):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choices: {sorted(PRESETS)}")
    return parse_experiment_config(PRESETS[name])
