"""
Daily station weather: record types, CSV ingestion/export and a seeded
synthetic generator.

CSV layout (one header row, ISO dates, ``.`` decimal)::

    date,tmax,tmin,rs,rhmax,rhmin,u2
    2010-06-01,30.0,18.0,22.5,80,35,1.5
"""

from __future__ import annotations

import configparser
import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, TextIO

import numpy as np

REQUIRED_COLUMNS = ("date", "tmax", "tmin", "rs", "rhmax", "rhmin", "u2")

# canonical column -> MeteoRecord attribute
_FIELD_FOR_COLUMN = {
    "tmax": "t_max",
    "tmin": "t_min",
    "rs": "r_s",
    "rhmax": "rh_max",
    "rhmin": "rh_min",
    "u2": "u2",
}

RH_HARD_MAX = 110.0
RH_SOFT_MAX = 100.0

FLAG_RH_ABOVE_SATURATION = "RHAboveSaturation"
FLAG_REJECTED = "Rejected"


class MeteoDataError(ValueError):
    """Base class for ingestion and synthesis errors."""


class MissingColumn(MeteoDataError):
    def __init__(self, column: str):
        super().__init__(f"missing required column {column!r}")
        self.column = column


class UnparsableValue(MeteoDataError):
    def __init__(self, row: int, col: str, value: str):
        super().__init__(f"row {row}: cannot parse {col}={value!r}")
        self.row = row
        self.col = col
        self.value = value


class HardInvariantViolation(MeteoDataError):
    def __init__(self, row: int | None, reason: str):
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}{reason}")
        self.row = row
        self.reason = reason


class InvalidProfile(MeteoDataError):
    pass


class InvalidStation(MeteoDataError):
    pass


@dataclass(frozen=True)
class QualityFlag:
    row: int
    code: str
    detail: str = ""


@dataclass(frozen=True)
class MeteoRecord:
    """One day of station weather.

    Units: temperatures in degC, ``r_s`` in MJ m-2 day-1, relative
    humidity in percent, ``u2`` (wind at 2 m) in m s-1.
    """

    date: dt.date
    t_max: float
    t_min: float
    r_s: float
    rh_max: float
    rh_min: float
    u2: float

    def violations(self) -> list[str]:
        """Hard-invariant violations, empty when the record is valid."""
        problems = []
        values = (self.t_max, self.t_min, self.r_s, self.rh_max, self.rh_min, self.u2)
        if not all(math.isfinite(v) for v in values):
            return ["non-finite value"]
        if self.t_min > self.t_max:
            problems.append(f"t_min {self.t_min} > t_max {self.t_max}")
        if self.rh_min > self.rh_max:
            problems.append(f"rh_min {self.rh_min} > rh_max {self.rh_max}")
        if self.r_s < 0:
            problems.append(f"negative r_s {self.r_s}")
        if self.u2 < 0:
            problems.append(f"negative u2 {self.u2}")
        for name in ("rh_max", "rh_min"):
            v = getattr(self, name)
            if not 0.0 <= v <= RH_HARD_MAX:
                problems.append(f"{name} {v} outside [0, {RH_HARD_MAX:g}]")
        return problems

    def soft_flags(self) -> list[str]:
        if self.rh_max > RH_SOFT_MAX or self.rh_min > RH_SOFT_MAX:
            return [FLAG_RH_ABOVE_SATURATION]
        return []


@dataclass(frozen=True)
class StationMeta:
    name: str
    code: int
    longitude: float
    latitude: float
    altitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise InvalidStation(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise InvalidStation(f"longitude {self.longitude} outside [-180, 180]")
        if not -430.0 <= self.altitude <= 9000.0:
            raise InvalidStation(f"altitude {self.altitude} outside [-430, 9000]")


@dataclass(frozen=True)
class VariableStats:
    min: float
    max: float
    mean: float
    std: float


@dataclass(frozen=True)
class Seasonality:
    """Share of the variance carried by the annual cycle, and its peak day."""

    fraction: float
    peak_doy: float


# MeteoRecord attribute order used for profiles and model features
VARIABLES = ("t_max", "t_min", "r_s", "rh_max", "rh_min", "u2")

DEFAULT_SEASONALITY = {
    "t_max": Seasonality(0.88, 205.0),
    "t_min": Seasonality(0.85, 205.0),
    "r_s": Seasonality(0.92, 172.0),
    "rh_max": Seasonality(0.45, 15.0),
    "rh_min": Seasonality(0.60, 15.0),
    "u2": Seasonality(0.10, 190.0),
}


@dataclass(frozen=True)
class StationProfile:
    name: str
    stats: Mapping[str, VariableStats]
    seasonality: Mapping[str, Seasonality] = field(
        default_factory=lambda: dict(DEFAULT_SEASONALITY)
    )

    def validate(self) -> None:
        for var in VARIABLES:
            if var not in self.stats:
                raise InvalidProfile(f"profile {self.name!r} lacks {var}")
            s = self.stats[var]
            if s.min > s.max:
                raise InvalidProfile(f"{var}: min {s.min} > max {s.max}")
            if not s.min <= s.mean <= s.max:
                raise InvalidProfile(f"{var}: mean {s.mean} outside [{s.min}, {s.max}]")
            if s.std < 0:
                raise InvalidProfile(f"{var}: negative std {s.std}")
            season = self.seasonality.get(var, Seasonality(0.0, 1.0))
            if not 0.0 <= season.fraction <= 1.0:
                raise InvalidProfile(f"{var}: seasonal fraction {season.fraction} outside [0, 1]")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def _parse_float(text: str) -> float:
    value = float(text.strip())
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def parse_csv(
    source: bytes | str | TextIO | Path,
    schema: Mapping[str, str] | None = None,
    strict: bool = True,
) -> tuple[list[MeteoRecord], list[QualityFlag]]:
    """Read daily records from CSV.

    ``schema`` maps canonical column names (``date``, ``tmax``, ...) to the
    header names used in the file; unmapped columns are looked up by their
    canonical name.  Row indices in errors and flags count data rows from 0.

    With ``strict`` any bad row raises.  Otherwise bad rows are skipped and
    reported as flags with code ``Rejected``.  A missing column always raises.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MissingColumn(REQUIRED_COLUMNS[0]) from None
    schema = dict(schema or {})
    positions = {}
    for col in REQUIRED_COLUMNS:
        name = schema.get(col, col)
        if name not in header:
            raise MissingColumn(name)
        positions[col] = header.index(name)

    records: list[MeteoRecord] = []
    flags: list[QualityFlag] = []
    for row_idx, row in enumerate(r for r in reader if any(cell.strip() for cell in r)):
        try:
            record = _row_to_record(row_idx, row, positions)
            problems = record.violations()
            if problems:
                raise HardInvariantViolation(row_idx, "; ".join(problems))
        except MeteoDataError as exc:
            if strict:
                raise
            flags.append(QualityFlag(row_idx, FLAG_REJECTED, str(exc)))
            continue
        for code in record.soft_flags():
            flags.append(QualityFlag(row_idx, code, f"rh_max={record.rh_max:g}, rh_min={record.rh_min:g}"))
        records.append(record)
    return records, flags


def _row_to_record(row_idx: int, row: list[str], positions: Mapping[str, int]) -> MeteoRecord:
    values = {}
    for col, pos in positions.items():
        raw = row[pos] if pos < len(row) else ""
        try:
            if col == "date":
                values["date"] = _parse_date(raw)
            else:
                values[_FIELD_FOR_COLUMN[col]] = _parse_float(raw)
        except ValueError:
            raise UnparsableValue(row_idx, col, raw) from None
    return MeteoRecord(**values)


def _read_text(source) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def write_csv(records: Iterable[MeteoRecord], dest: TextIO | Path | None = None) -> str:
    """Serialise records in the ingestion layout.  Floats keep full precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS)
    for r in records:
        writer.writerow([r.date.isoformat()] + [repr(float(getattr(r, f))) for f in VARIABLES])
    text = buf.getvalue()
    if isinstance(dest, Path):
        dest.write_text(text, encoding="utf-8")
    elif dest is not None:
        dest.write(text)
    return text


# ---------------------------------------------------------------------------
# Station metadata files
# ---------------------------------------------------------------------------

_STATION_KEYS = ("name", "code", "longitude", "latitude", "altitude")


def station_from_mapping(data: Mapping) -> StationMeta:
    missing = [k for k in _STATION_KEYS if k not in data]
    if missing:
        raise InvalidStation(f"station config lacks {', '.join(missing)}")
    try:
        return StationMeta(
            name=str(data["name"]),
            code=int(data["code"]),
            longitude=float(data["longitude"]),
            latitude=float(data["latitude"]),
            altitude=float(data["altitude"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidStation):
            raise
        raise InvalidStation(f"bad station config value: {exc}") from None


def load_station(path: str | Path) -> StationMeta:
    """Load station metadata from a JSON file or an INI-style ``.cfg``.

    INI files take the keys from a ``[station]`` section (or the first
    section when there is no such name).
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return station_from_mapping(json.loads(text))
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError:
        parser.read_string("[station]\n" + text)
    if not parser.sections():
        raise InvalidStation(f"{path}: no station section")
    section = "station" if parser.has_section("station") else parser.sections()[0]
    return station_from_mapping(dict(parser[section]))


def dump_station(station: StationMeta, path: str | Path) -> None:
    parser = configparser.ConfigParser()
    parser["station"] = {k: str(getattr(station, k)) for k in _STATION_KEYS}
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

def synthesize_dataset(
    profile: StationProfile,
    n_days: int,
    seed: int,
    start: dt.date = dt.date(1999, 1, 1),
) -> list[MeteoRecord]:
    """Generate ``n_days`` consecutive days of weather matching a profile.

    Every variable is an annual cosine around the profile mean plus Gaussian
    noise, clamped to the profile range.  Variables share only the day-of-year
    phase.  The seasonal amplitude and the noise level split the profile's
    variance according to ``profile.seasonality``.  After clamping, ``t_min``
    and ``rh_min`` are capped at their daily maximum counterparts.
    """
    if n_days < 1:
        raise ValueError("n_days must be >= 1")
    profile.validate()
    rng = np.random.default_rng(seed)
    dates = [start + dt.timedelta(days=i) for i in range(n_days)]
    doy = np.array([d.timetuple().tm_yday for d in dates], dtype=float)

    series = {}
    for var in VARIABLES:
        stats = profile.stats[var]
        season = profile.seasonality.get(var, Seasonality(0.0, 1.0))
        amplitude = stats.std * math.sqrt(2.0 * season.fraction)
        noise_std = stats.std * math.sqrt(1.0 - season.fraction)
        cycle = np.cos(2.0 * math.pi * (doy - season.peak_doy) / 365.25)
        values = stats.mean + amplitude * cycle + noise_std * rng.standard_normal(n_days)
        series[var] = np.clip(values, stats.min, stats.max)

    series["t_min"] = np.minimum(series["t_min"], series["t_max"])
    series["rh_min"] = np.minimum(series["rh_min"], series["rh_max"])
    series["r_s"] = np.maximum(series["r_s"], 0.0)
    series["u2"] = np.maximum(series["u2"], 0.0)
    for var in ("rh_max", "rh_min"):
        series[var] = np.clip(series[var], 0.0, RH_HARD_MAX)

    return [
        MeteoRecord(d, *(float(series[var][i]) for var in VARIABLES))
        for i, d in enumerate(dates)
    ]


def feature_matrix(records: Iterable[MeteoRecord]) -> np.ndarray:
    """Model inputs, one row per record: tmax, tmin, rs, rhmax, rhmin, u2."""
    rows = [[getattr(r, var) for var in VARIABLES] for r in records]
    return np.asarray(rows, dtype=np.float64).reshape(-1, len(VARIABLES))
