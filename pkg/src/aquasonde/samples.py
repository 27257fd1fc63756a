"""Geotagged readings, dwell-window capture, and irrigation-water norms.

A reading is the survey's database record: date/time, longitude,
latitude, pH and water temperature, plus device and station provenance.
Quality classification uses the irrigation-water bands: pH normal range
6.5-8.4, temperature 17-19 C in winter and 27-29 C in summer, all
bounds inclusive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Iterable, Iterator

from . import calibration as cal_mod
from .wire import SensorFrame

PH_NORM_LOW = 6.5
PH_NORM_HIGH = 8.4

TEMP_NORMS = {
    "winter": (17.0, 19.0),
    "summer": (27.0, 29.0),
}
SEASONS = tuple(TEMP_NORMS)

DEFAULT_SETTLE_S = 180.0
DEFAULT_AVG_COUNT = 10

# Ingestion refuses timestamps more than this far past the receive time.
MAX_FUTURE_SKEW_S = 24 * 3600.0

CSV_COLUMNS = ("date", "time", "longitude", "latitude", "ph", "temperature")
CSV_PROVENANCE_COLUMNS = CSV_COLUMNS + ("device_id", "station", "seq_origin")
CSV_HEADER = ",".join(CSV_COLUMNS)
CSV_PROVENANCE_HEADER = ",".join(CSV_PROVENANCE_COLUMNS)


class InsufficientData(Exception):
    """The frame stream ended before the dwell window could be filled."""


class EmptyInput(ValueError):
    """An aggregate was asked for over no readings."""


class Classification(str, enum.Enum):
    BELOW_NORMAL = "BelowNormal"
    NORMAL = "Normal"
    ABOVE_NORMAL = "AboveNormal"


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 UTC timestamp ('Z' or offset suffix)."""
    ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Reading:
    """One geotagged sample: the survey database record."""

    timestamp: datetime
    longitude: float
    latitude: float
    ph: float
    temp_c: float
    device_id: str
    station: str | None = None
    seq_origin: int = 0

    def invariant_violation(self) -> str | None:
        if self.timestamp.tzinfo is None:
            return "timestamp must be timezone-aware UTC"
        if not -180.0 <= self.longitude <= 180.0:
            return f"longitude {self.longitude} outside [-180, 180]"
        if not -90.0 <= self.latitude <= 90.0:
            return f"latitude {self.latitude} outside [-90, 90]"
        if not 0.0 <= self.ph <= 14.0:
            return f"ph {self.ph} outside [0, 14]"
        if not 0.0 <= self.temp_c <= 60.0:
            return f"temp_c {self.temp_c} outside [0, 60]"
        if not self.device_id:
            return "device_id is empty"
        if not 0 <= self.seq_origin <= 255:
            return f"seq_origin {self.seq_origin} outside 0-255"
        return None

    def to_json(self) -> dict:
        return {
            "timestamp": format_timestamp(self.timestamp),
            "longitude": self.longitude,
            "latitude": self.latitude,
            "ph": self.ph,
            "temp_c": self.temp_c,
            "device_id": self.device_id,
            "station": self.station,
            "seq_origin": self.seq_origin,
        }

    @classmethod
    def from_json(cls, obj: object) -> "Reading":
        """Build from a decoded JSON object; raises ValueError on shape errors."""
        if not isinstance(obj, dict):
            raise ValueError("reading must be a JSON object")
        try:
            station = obj.get("station")
            return cls(
                timestamp=parse_timestamp(str(obj["timestamp"])),
                longitude=float(obj["longitude"]),
                latitude=float(obj["latitude"]),
                ph=float(obj["ph"]),
                temp_c=float(obj["temp_c"]),
                device_id=str(obj["device_id"]),
                station=None if station in (None, "") else str(station),
                seq_origin=int(obj.get("seq_origin", 0)),
            )
        except KeyError as exc:
            raise ValueError(f"reading is missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed reading: {exc}") from exc


@dataclass(frozen=True)
class Station:
    """A labelled, geolocated sampling point."""

    label: str
    longitude: float
    latitude: float
    visited_at: datetime | None = None

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("station label must be nonempty")


@dataclass(frozen=True)
class QualityAssessment:
    """Classification of one parameter against its norm band."""

    parameter: str
    value: float
    classification: Classification
    norm_low: float
    norm_high: float
    season: str | None = None

    def to_json(self) -> dict:
        return {
            "parameter": self.parameter,
            "value": self.value,
            "classification": self.classification.value,
            "norm_low": self.norm_low,
            "norm_high": self.norm_high,
            "season": self.season,
        }


@dataclass(frozen=True)
class StationSummary:
    """Per-station aggregate for the survey report."""

    station: str
    count: int
    ph_mean: float
    ph_min: float
    ph_max: float
    temp_mean: float
    temp_min: float
    temp_max: float
    ph_assessment: QualityAssessment
    temp_assessment: QualityAssessment

    def to_json(self) -> dict:
        return {
            "station": self.station,
            "count": self.count,
            "ph_mean": self.ph_mean,
            "ph_min": self.ph_min,
            "ph_max": self.ph_max,
            "temp_mean": self.temp_mean,
            "temp_min": self.temp_min,
            "temp_max": self.temp_max,
            "ph_assessment": self.ph_assessment.to_json(),
            "temp_assessment": self.temp_assessment.to_json(),
        }


def _classify(value: float, low: float, high: float) -> Classification:
    if value < low:
        return Classification.BELOW_NORMAL
    if value <= high:
        return Classification.NORMAL
    return Classification.ABOVE_NORMAL


def assess_ph(ph: float) -> QualityAssessment:
    """Classify a pH value against the irrigation norm band 6.5-8.4."""
    if not 0.0 <= ph <= 14.0:
        raise ValueError(f"ph {ph} outside [0, 14]")
    return QualityAssessment(
        parameter="ph",
        value=ph,
        classification=_classify(ph, PH_NORM_LOW, PH_NORM_HIGH),
        norm_low=PH_NORM_LOW,
        norm_high=PH_NORM_HIGH,
    )


def assess_temperature(temp_c: float, season: str) -> QualityAssessment:
    """Classify a water temperature against the seasonal norm band."""
    if not 0.0 <= temp_c <= 60.0:
        raise ValueError(f"temp_c {temp_c} outside [0, 60]")
    if season not in TEMP_NORMS:
        raise ValueError(f"season must be one of {SEASONS}, got {season!r}")
    low, high = TEMP_NORMS[season]
    return QualityAssessment(
        parameter="temperature",
        value=temp_c,
        classification=_classify(temp_c, low, high),
        norm_low=low,
        norm_high=high,
        season=season,
    )


def dwell_capture(
    frames: Iterable[tuple[datetime, SensorFrame]],
    cal: cal_mod.PhCalibration,
    station: Station,
    settle_s: float = DEFAULT_SETTLE_S,
    avg_count: int = DEFAULT_AVG_COUNT,
    device_id: str = "aquasonde",
) -> Reading:
    """Take one reading at a station after the settle window.

    Frames timestamped within ``settle_s`` of arrival (the first frame
    seen) are discarded; the next ``avg_count`` frames with both
    validity flags set are converted through the calibration and
    averaged.  The reading carries the station's coordinates and the
    timestamp of the final averaged frame.

    Raises:
        InsufficientData: the stream ended before enough valid frames
            arrived after the settle window.
    """
    if settle_s < 0:
        raise ValueError("settle_s must be >= 0")
    if avg_count < 1:
        raise ValueError("avg_count must be >= 1")
    it: Iterator[tuple[datetime, SensorFrame]] = iter(frames)
    arrival: datetime | None = None
    phs: list[float] = []
    temps: list[float] = []
    last: tuple[datetime, SensorFrame] | None = None
    for stamped_at, frame in it:
        if arrival is None:
            arrival = stamped_at
        if (stamped_at - arrival).total_seconds() < settle_s:
            continue
        if not (frame.ph_valid and frame.temp_valid):
            continue
        temp_c = cal_mod.temp_c_from_adc(frame.temp_adc)
        mv = cal_mod.electrode_mv_from_adc(frame.ph_adc)
        phs.append(cal_mod.ph_from_mv(mv, cal, temp_c).ph)
        temps.append(temp_c)
        last = (stamped_at, frame)
        if len(phs) >= avg_count:
            break
    if len(phs) < avg_count or last is None:
        raise InsufficientData(
            f"station {station.label}: needed {avg_count} valid frames after "
            f"the {settle_s:.0f}s settle window, got {len(phs)}"
        )
    taken_at, final_frame = last
    return Reading(
        timestamp=taken_at.astimezone(timezone.utc).replace(microsecond=0),
        longitude=station.longitude,
        latitude=station.latitude,
        ph=math.fsum(phs) / len(phs),
        temp_c=math.fsum(temps) / len(temps),
        device_id=device_id,
        station=station.label,
        seq_origin=final_frame.seq,
    )


def summarize_station(readings: list[Reading], season: str = "summer") -> StationSummary:
    """Aggregate one station's readings; assessments run on the means."""
    if not readings:
        raise EmptyInput("no readings to summarize")
    labels = {r.station for r in readings}
    if len(labels) > 1:
        raise ValueError(f"readings span multiple stations: {sorted(map(str, labels))}")
    phs = [r.ph for r in readings]
    temps = [r.temp_c for r in readings]
    ph_mean = math.fsum(phs) / len(phs)
    temp_mean = math.fsum(temps) / len(temps)
    return StationSummary(
        station=readings[0].station or "",
        count=len(readings),
        ph_mean=ph_mean,
        ph_min=min(phs),
        ph_max=max(phs),
        temp_mean=temp_mean,
        temp_min=min(temps),
        temp_max=max(temps),
        ph_assessment=assess_ph(ph_mean),
        temp_assessment=assess_temperature(temp_mean, season),
    )


def dedup_key(reading: Reading) -> tuple[str, str, int]:
    """Idempotency key: same (device, instant, originating seq) = same sample."""
    return (reading.device_id, format_timestamp(reading.timestamp), reading.seq_origin)


def format_csv_row(reading: Reading, with_provenance: bool = False) -> str:
    ts = reading.timestamp.astimezone(timezone.utc)
    row = (
        f"{ts.strftime('%Y-%m-%d')},{ts.strftime('%H:%M:%S')},"
        f"{reading.longitude:.6f},{reading.latitude:.6f},"
        f"{reading.ph:.2f},{reading.temp_c:.2f}"
    )
    if with_provenance:
        row += f",{reading.device_id},{reading.station or ''},{reading.seq_origin}"
    return row


def readings_to_csv(readings: Iterable[Reading], with_provenance: bool = False) -> str:
    """Render the documented CSV export (header + one row per reading)."""
    header = CSV_PROVENANCE_HEADER if with_provenance else CSV_HEADER
    lines = [header]
    lines.extend(format_csv_row(r, with_provenance) for r in readings)
    return "\n".join(lines) + "\n"


def readings_from_csv(text: str) -> list[Reading]:
    """Parse a provenance-variant CSV export back into readings.

    The plain 6-column export drops device and sequence provenance and
    cannot be re-ingested; only the provenance variant round-trips.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty CSV input")
    if lines[0] != CSV_PROVENANCE_HEADER:
        raise ValueError(
            "CSV must carry the provenance columns "
            f"({CSV_PROVENANCE_HEADER!r}); re-export with provenance enabled"
        )
    readings = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(CSV_PROVENANCE_COLUMNS):
            raise ValueError(f"line {lineno}: expected {len(CSV_PROVENANCE_COLUMNS)} columns")
        date, time_, lon, lat, ph, temp, device_id, station, seq = parts
        readings.append(
            Reading(
                timestamp=parse_timestamp(f"{date}T{time_}Z"),
                longitude=float(lon),
                latitude=float(lat),
                ph=float(ph),
                temp_c=float(temp),
                device_id=device_id,
                station=station or None,
                seq_origin=int(seq),
            )
        )
    return readings


def with_station(reading: Reading, station: Station) -> Reading:
    """Copy a reading onto a station's label and coordinates."""
    return replace(
        reading,
        station=station.label,
        longitude=station.longitude,
        latitude=station.latitude,
    )
