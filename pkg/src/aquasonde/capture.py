"""Field capture session: byte stream in, geotagged readings out.

Plays the phone's role: decode the device byte stream, stamp frames
with logical time, hold the settle window at each station, average a
reading, upload it, and keep a local CSV that remains the source of
truth when the service is unreachable.

Logical time: a live TCP stream is stamped ``session start +
wall-elapsed x time_scale`` so compressed desk runs reproduce real
3-minute dwells; file replay is stamped at the configured frame rate.

The wire format carries no station id, so the settle window re-arms
when the session advances to the next station and leftover frames from
the previous one fall inside it.  Each station consumes about
``settle_s * rate + avg_count`` frames; keep that at or below the
device's per-station dwell (``dwell_s * rate``), with slack for receive
jitter, or the averaging window drifts across station boundaries.  The
bundled scenario's 220 s dwell against the default 180 s + 10 settle
leaves 30 s of slack.
"""

from __future__ import annotations

import logging
import socket
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from time import monotonic
from typing import Iterator

from . import client
from .calibration import PhCalibration
from .samples import (
    CSV_PROVENANCE_HEADER,
    DEFAULT_AVG_COUNT,
    DEFAULT_SETTLE_S,
    InsufficientData,
    Reading,
    Station,
    assess_ph,
    assess_temperature,
    dwell_capture,
    format_csv_row,
)
from .textconf import parse_plaintext
from .wire import FrameError, SensorFrame, StreamDecoder, seq_gap

log = logging.getLogger(__name__)

RECV_CHUNK = 4096


@dataclass(frozen=True)
class SessionConfig:
    """Parsed capture configuration (docs/file-formats.md)."""

    device: str  # tcp://host:port or a replay file path
    calibration_path: str
    stations: tuple[Station, ...]
    settle_s: float = DEFAULT_SETTLE_S
    avg_count: int = DEFAULT_AVG_COUNT
    service_url: str | None = None
    season: str = "summer"
    time_scale: float = 1.0
    frame_rate_hz: float = 1.0
    csv_out: str = "readings.csv"
    device_id: str = "aquasonde-01"

    def validate(self) -> None:
        if self.settle_s < 0:
            raise ValueError("settle_s must be >= 0")
        if self.avg_count < 1:
            raise ValueError("avg_count must be >= 1")
        if self.time_scale <= 0 or self.frame_rate_hz <= 0:
            raise ValueError("time_scale and frame_rate_hz must be > 0")
        labels = [s.label for s in self.stations]
        if not labels:
            raise ValueError("no stations configured")
        if len(set(labels)) != len(labels):
            raise ValueError(f"station labels are not unique: {labels}")


def load_session_config(path: str | Path) -> SessionConfig:
    kv, tables = parse_plaintext(Path(path).read_text(encoding="utf-8"))
    stations = []
    for row in tables.get("stations", []):
        if len(row) != 3:
            raise ValueError(f"station row needs 3 columns (label lon lat), got {row}")
        stations.append(Station(label=row[0], longitude=float(row[1]), latitude=float(row[2])))
    try:
        config = SessionConfig(
            device=kv["device"],
            calibration_path=kv["calibration"],
            stations=tuple(stations),
            settle_s=float(kv.get("settle_s", DEFAULT_SETTLE_S)),
            avg_count=int(kv.get("avg_count", DEFAULT_AVG_COUNT)),
            service_url=kv.get("service") or None,
            season=kv.get("season", "summer"),
            time_scale=float(kv.get("time_scale", 1.0)),
            frame_rate_hz=float(kv.get("frame_rate_hz", 1.0)),
            csv_out=kv.get("csv_out", "readings.csv"),
            device_id=kv.get("device_id", "aquasonde-01"),
        )
    except KeyError as exc:
        raise ValueError(f"capture config is missing key {exc}") from exc
    config.validate()
    return config


@dataclass
class SessionStats:
    frames: int = 0
    frame_errors: list[FrameError] = field(default_factory=list)
    lost_frames: int = 0
    _last_seq: int | None = None

    def account(self, frame: SensorFrame) -> None:
        if self._last_seq is not None:
            self.lost_frames += seq_gap(self._last_seq, frame.seq)
        self._last_seq = frame.seq
        self.frames += 1


def stream_frames(
    chunks: Iterator[bytes],
    base_time: datetime,
    time_scale: float,
    stats: SessionStats,
) -> Iterator[tuple[datetime, SensorFrame]]:
    """Decode chunks into frames stamped with logical receive time."""
    decoder = StreamDecoder()
    start = monotonic()
    for chunk in chunks:
        frames, errors = decoder.feed(chunk)
        stats.frame_errors.extend(errors)
        stamp = base_time + timedelta(seconds=(monotonic() - start) * time_scale)
        for frame in frames:
            stats.account(frame)
            yield stamp, frame
    stats.frame_errors.extend(decoder.flush())


def replay_frames(
    data: bytes,
    base_time: datetime,
    frame_rate_hz: float,
    stats: SessionStats,
) -> Iterator[tuple[datetime, SensorFrame]]:
    """Decode a recorded stream, stamping frames at the nominal rate."""
    decoder = StreamDecoder()
    frames, errors = decoder.feed(data)
    errors.extend(decoder.flush())
    stats.frame_errors.extend(errors)
    for i, frame in enumerate(frames):
        stats.account(frame)
        yield base_time + timedelta(seconds=i / frame_rate_hz), frame


def _tcp_chunks(host: str, port: int) -> Iterator[bytes]:
    with socket.create_connection((host, port), timeout=30.0) as sock:
        while True:
            chunk = sock.recv(RECV_CHUNK)
            if not chunk:
                return
            yield chunk


def open_frame_source(
    config: SessionConfig, base_time: datetime, stats: SessionStats
) -> Iterator[tuple[datetime, SensorFrame]]:
    """Build the stamped frame iterator for the configured device endpoint."""
    if config.device.startswith("tcp://"):
        host, _, port = config.device[len("tcp://") :].partition(":")
        if not port:
            raise ValueError(f"device endpoint {config.device!r} needs tcp://host:port")
        chunks = _tcp_chunks(host, int(port))
        return stream_frames(chunks, base_time, config.time_scale, stats)
    data = Path(config.device).read_bytes()
    return replay_frames(data, base_time, config.frame_rate_hz, stats)


@dataclass
class CaptureOutcome:
    readings: list[Reading] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (station, reason)
    uploaded: int = 0
    upload_warning: str | None = None
    stats: SessionStats = field(default_factory=SessionStats)


def run_session(
    config: SessionConfig,
    cal: PhCalibration,
    emit=print,
    base_time: datetime | None = None,
) -> CaptureOutcome:
    """Capture one reading per configured station, upload, and log CSV."""
    outcome = CaptureOutcome()
    base = base_time or datetime.now(timezone.utc).replace(microsecond=0)
    frames = open_frame_source(config, base, outcome.stats)
    csv_path = Path(config.csv_out)
    token = _env_token()
    service_up = config.service_url is not None
    for station in config.stations:
        try:
            reading = dwell_capture(
                frames,
                cal,
                station,
                settle_s=config.settle_s,
                avg_count=config.avg_count,
                device_id=config.device_id,
            )
        except InsufficientData as exc:
            outcome.skipped.append((station.label, str(exc)))
            emit(f"{station.label}: skipped ({exc})")
            continue
        outcome.readings.append(reading)
        ph_flag = assess_ph(reading.ph).classification.value
        temp_flag = assess_temperature(reading.temp_c, config.season).classification.value
        emit(
            f"{station.label}: pH {reading.ph:.2f} [{ph_flag}]  "
            f"temp {reading.temp_c:.2f} C [{temp_flag}]  at {reading.timestamp:%H:%M:%S}"
        )
        _append_csv(csv_path, reading)
        if service_up and config.service_url:
            try:
                response = client.post_readings(
                    config.service_url, [reading.to_json()], token=token
                )
                outcome.uploaded += response.get("accepted", 0) + response.get("duplicates", 0)
            except client.ServiceUnavailable as exc:
                service_up = False
                outcome.upload_warning = (
                    f"service unreachable ({exc}); readings kept in {csv_path}. "
                    f"Retry by POSTing the CSV rows to {config.service_url}/v1/readings "
                    f"once the service is back (dedup makes the retry safe)."
                )
                emit(f"warning: {outcome.upload_warning}")
    return outcome


def _env_token() -> str | None:
    import os

    return os.environ.get("AQUASONDE_TOKEN") or None


def _append_csv(path: Path, reading: Reading) -> None:
    new_file = not path.exists() or path.stat().st_size == 0
    with open(path, "a", encoding="utf-8") as f:
        if new_file:
            f.write(CSV_PROVENANCE_HEADER + "\n")
        f.write(format_csv_row(reading, with_provenance=True) + "\n")
