"""
Daily reference evapotranspiration (ET0) by the FAO-56 Penman-Monteith
equation::

              0.408 delta (Rn - G) + gamma * 900 / (T + 273) * u2 * (es - ea)
    ET0 = -----------------------------------------------------------------------
                            delta + gamma * (1 + 0.34 u2)

ET0 is in mm day-1, radiation terms in MJ m-2 day-1, vapour pressures in
kPa and temperatures in degC.  Net radiation is derived from measured
shortwave radiation following Allen et al. (1998), ch. 3, unless the
``radiation="rn"`` option passes the record's radiation through as Rn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .meteo_data import MeteoRecord, StationMeta

SVP_POLE = -237.3
FIXED_GAMMA = 0.066
SOLAR_CONSTANT = 0.0820  # MJ m-2 min-1
STEFAN_BOLTZMANN = 4.903e-9  # MJ K-4 m-2 day-1
DEFAULT_ALBEDO = 0.23
POLAR_LIMIT = 66.5


class PMError(ValueError):
    pass


class DomainError(PMError):
    pass


class OrderingError(PMError):
    pass


class PolarLatitude(PMError):
    pass


@dataclass(frozen=True)
class PMInputs:
    r_n: float
    g: float
    t_mean: float
    u2: float
    e_s: float
    e_a: float
    delta: float
    gamma: float

    def __post_init__(self):
        if self.e_a > self.e_s + 1e-9:
            raise DomainError(f"e_a {self.e_a} exceeds e_s {self.e_s}")
        if self.delta <= 0 or self.gamma <= 0:
            raise DomainError("delta and gamma must be positive")
        if self.u2 < 0:
            raise DomainError(f"negative wind speed {self.u2}")


@dataclass(frozen=True)
class PMOptions:
    """How the Penman-Monteith inputs are assembled from a daily record.

    gamma_mode: ``"altitude"`` derives the psychrometric constant from
        station altitude; ``"fixed"`` uses 0.066 kPa/degC.
    g: soil heat flux density, 0 for daily steps.
    albedo: canopy reflection coefficient used for net shortwave radiation.
    radiation: ``"rs"`` treats ``record.r_s`` as measured solar radiation
        and derives Rn; ``"rn"`` uses it directly as net radiation.
    """

    gamma_mode: Literal["altitude", "fixed"] = "altitude"
    g: float = 0.0
    albedo: float = DEFAULT_ALBEDO
    radiation: Literal["rs", "rn"] = "rs"


def sat_vapor_pressure(t: float) -> float:
    """Saturation vapour pressure e°(T) in kPa."""
    if t <= SVP_POLE:
        raise DomainError(f"temperature {t} at or below pole {SVP_POLE}")
    return 0.6108 * math.exp(17.27 * t / (t + 237.3))


def mean_sat_vapor_pressure(t_max: float, t_min: float) -> float:
    if t_min > t_max:
        raise OrderingError(f"t_min {t_min} > t_max {t_max}")
    return (sat_vapor_pressure(t_max) + sat_vapor_pressure(t_min)) / 2.0


def actual_vapor_pressure(t_max: float, t_min: float, rh_max: float, rh_min: float) -> float:
    if t_min > t_max:
        raise OrderingError(f"t_min {t_min} > t_max {t_max}")
    if rh_max < 0 or rh_min < 0:
        raise DomainError("relative humidity must be non-negative")
    return (
        sat_vapor_pressure(t_min) * rh_max / 100.0
        + sat_vapor_pressure(t_max) * rh_min / 100.0
    ) / 2.0


def svp_slope(t_mean: float) -> float:
    """Slope of the saturation vapour pressure curve, kPa/degC."""
    if t_mean <= SVP_POLE:
        raise DomainError(f"temperature {t_mean} at or below pole {SVP_POLE}")
    return 4098.0 * sat_vapor_pressure(t_mean) / (t_mean + 237.3) ** 2


def psychrometric_constant(
    altitude: float = 0.0, mode: Literal["altitude", "fixed"] = "altitude"
) -> float:
    if mode == "fixed":
        return FIXED_GAMMA
    if mode != "altitude":
        raise ValueError(f"unknown gamma mode {mode!r}")
    pressure = 101.3 * ((293.0 - 0.0065 * altitude) / 293.0) ** 5.26
    return 0.000665 * pressure


def extraterrestrial_radiation(latitude: float, day_of_year: int) -> float:
    """Daily Ra in MJ m-2 day-1 for a latitude in degrees."""
    if abs(latitude) >= POLAR_LIMIT:
        raise PolarLatitude(f"latitude {latitude} beyond +/-{POLAR_LIMIT}")
    phi = math.radians(latitude)
    angle = 2.0 * math.pi * day_of_year / 365.0
    dr = 1.0 + 0.033 * math.cos(angle)
    decl = 0.409 * math.sin(angle - 1.39)
    ws = math.acos(-math.tan(phi) * math.tan(decl))
    return (24.0 * 60.0 / math.pi) * SOLAR_CONSTANT * dr * (
        ws * math.sin(phi) * math.sin(decl) + math.cos(phi) * math.cos(decl) * math.sin(ws)
    )


def net_radiation(
    record: MeteoRecord, station: StationMeta, albedo: float = DEFAULT_ALBEDO
) -> float:
    """Rn = Rns - Rnl from measured shortwave radiation."""
    ra = extraterrestrial_radiation(station.latitude, record.date.timetuple().tm_yday)
    rso = (0.75 + 2e-5 * station.altitude) * ra
    rns = (1.0 - albedo) * record.r_s
    e_a = min(
        actual_vapor_pressure(record.t_max, record.t_min, record.rh_max, record.rh_min),
        mean_sat_vapor_pressure(record.t_max, record.t_min),
    )
    # relative shortwave radiation bounded to [0.3, 1] (ASCE-EWRI 2005)
    ratio = min(max(record.r_s / rso, 0.3), 1.0) if rso > 0 else 1.0
    tk4 = ((record.t_max + 273.16) ** 4 + (record.t_min + 273.16) ** 4) / 2.0
    rnl = STEFAN_BOLTZMANN * tk4 * (0.34 - 0.14 * math.sqrt(e_a)) * (1.35 * ratio - 0.35)
    return rns - rnl


def et0_from_inputs(inp: PMInputs) -> float:
    numerator = 0.408 * inp.delta * (inp.r_n - inp.g) + inp.gamma * 900.0 / (inp.t_mean + 273.0) * inp.u2 * (
        inp.e_s - inp.e_a
    )
    return numerator / (inp.delta + inp.gamma * (1.0 + 0.34 * inp.u2))


def pm_inputs(record: MeteoRecord, station: StationMeta, options: PMOptions = PMOptions()) -> PMInputs:
    t_mean = (record.t_max + record.t_min) / 2.0
    e_s = mean_sat_vapor_pressure(record.t_max, record.t_min)
    # RH above 100 % is clamped at saturation
    e_a = min(actual_vapor_pressure(record.t_max, record.t_min, record.rh_max, record.rh_min), e_s)
    if options.radiation == "rn":
        r_n = record.r_s
    else:
        r_n = net_radiation(record, station, options.albedo)
    return PMInputs(
        r_n=r_n,
        g=options.g,
        t_mean=t_mean,
        u2=record.u2,
        e_s=e_s,
        e_a=e_a,
        delta=svp_slope(t_mean),
        gamma=psychrometric_constant(station.altitude, options.gamma_mode),
    )


def et0_penman_monteith(
    record: MeteoRecord, station: StationMeta, options: PMOptions = PMOptions()
) -> float:
    """Reference evapotranspiration for one day, mm day-1."""
    return et0_from_inputs(pm_inputs(record, station, options))


def et0_series(
    records: Iterable[MeteoRecord], station: StationMeta, options: PMOptions = PMOptions()
) -> np.ndarray:
    return np.array([et0_penman_monteith(r, station, options) for r in records], dtype=np.float64)
