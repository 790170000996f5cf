"""Metadata and 1999-2018 summary statistics of the four Turkish stations.

The statistics drive :func:`et0lab.meteo_data.synthesize_dataset`; the
observed ET0 summaries are kept for comparison with synthetic output.
"""

from __future__ import annotations

from .meteo_data import StationMeta, StationProfile, VariableStats

STATIONS = {
    "adana": StationMeta("Adana", 1, 35.34, 37.00, 23.0),
    "aksaray": StationMeta("Aksaray", 2, 34.00, 38.37, 970.0),
    "isparta": StationMeta("Isparta", 3, 30.57, 37.78, 997.0),
    "nigde": StationMeta("Nigde", 4, 34.68, 37.96, 1211.0),
}

# (min, max, mean, std) per variable
_TABLE = {
    "adana": {
        "t_max": (5.30, 44.40, 25.74, 7.68),
        "t_min": (-3.20, 29.80, 14.85, 7.28),
        "r_s": (0.00, 33.68, 15.90, 6.98),
        "rh_max": (27.00, 100.00, 86.22, 11.38),
        "rh_min": (0.00, 96.00, 42.57, 17.09),
        "u2": (0.30, 6.00, 1.62, 0.70),
        "et0": (0.51, 12.73, 4.45, 2.20),
    },
    "aksaray": {
        "t_max": (-10.00, 40.00, 19.30, 10.06),
        "t_min": (-20.40, 25.60, 7.09, 8.05),
        "r_s": (0.69, 32.43, 16.98, 7.82),
        "rh_max": (20.00, 100.00, 71.40, 16.46),
        "rh_min": (0.00, 98.00, 37.69, 17.01),
        "u2": (0.30, 5.92, 1.58, 0.69),
        "et0": (0.34, 10.61, 4.24, 2.55),
    },
    "isparta": {
        "t_max": (-6.60, 42.30, 19.24, 9.49),
        "t_min": (-16.00, 23.30, 6.53, 7.19),
        "r_s": (0.00, 32.52, 15.30, 7.99),
        "rh_max": (14.00, 100.00, 81.44, 12.94),
        "rh_min": (0.00, 99.00, 40.93, 16.87),
        "u2": (0.00, 5.78, 1.32, 0.70),
        "et0": (0.42, 9.60, 3.73, 2.30),
    },
    "nigde": {
        "t_max": (-10.30, 38.50, 18.51, 9.90),
        "t_min": (-19.80, 23.00, 6.02, 7.89),
        "r_s": (0.68, 35.10, 18.75, 8.38),
        "rh_max": (24.00, 104.00, 75.55, 15.13),
        "rh_min": (2.00, 96.00, 37.44, 17.49),
        "u2": (0.38, 7.95, 1.83, 0.70),
        "et0": (0.39, 10.99, 4.49, 2.67),
    },
}

PROFILES = {
    key: StationProfile(
        name=STATIONS[key].name,
        stats={var: VariableStats(*vals) for var, vals in table.items() if var != "et0"},
    )
    for key, table in _TABLE.items()
}

OBSERVED_ET0 = {key: VariableStats(*table["et0"]) for key, table in _TABLE.items()}


def lookup(name: str) -> str:
    """Normalise a station name (``"Niğde"``, ``"NIGDE"``) to its table key."""
    key = name.strip().lower().replace("ğ", "g")
    if key not in STATIONS:
        raise KeyError(f"unknown station {name!r}; known: {', '.join(STATIONS)}")
    return key
