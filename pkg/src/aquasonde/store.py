"""Durable reading store: append-only JSON-lines log + in-memory indexes.

One serialized record per line.  A batch is flushed and fsync'd before
it is acknowledged, so an acknowledged record survives a process kill at
any later instant.  Recovery replays the whole log; the dedup index is
rebuilt rather than persisted.  A final line without its newline
terminator was never acknowledged and is discarded with a warning; any
earlier line that fails to parse or validate means real corruption and
raises LogCorrupt.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .samples import (
    MAX_FUTURE_SKEW_S,
    Reading,
    StationSummary,
    dedup_key,
    format_timestamp,
    parse_timestamp,
    summarize_station,
)

log = logging.getLogger(__name__)

SOURCES = ("live", "replay")


class LogCorrupt(Exception):
    """A non-final log record failed parsing or validation."""


class StorageError(Exception):
    """The log could not be extended; nothing from the batch was kept."""


@dataclass(frozen=True)
class IngestRecord:
    reading: Reading
    received_at: datetime
    source: str = "live"

    def to_json(self) -> dict:
        obj = self.reading.to_json()
        obj["received_at"] = format_timestamp(self.received_at)
        obj["source"] = self.source
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "IngestRecord":
        reading = Reading.from_json(obj)
        received_at = parse_timestamp(str(obj.get("received_at", "")))
        source = str(obj.get("source", "live"))
        if source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, got {source!r}")
        return cls(reading=reading, received_at=received_at, source=source)


@dataclass
class BatchResult:
    accepted: int = 0
    duplicates: int = 0
    rejected: list[dict] = field(default_factory=list)
    accepted_records: list[IngestRecord] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "rejected": self.rejected,
        }


def _validate(record: IngestRecord) -> str | None:
    violation = record.reading.invariant_violation()
    if violation is not None:
        return f"FieldOutOfRange: {violation}"
    skew = timedelta(seconds=MAX_FUTURE_SKEW_S)
    if record.reading.timestamp > record.received_at + skew:
        return (
            "TimestampTooFarFuture: "
            f"{format_timestamp(record.reading.timestamp)} is more than 24h "
            f"past receive time {format_timestamp(record.received_at)}"
        )
    return None


class ReadingStore:
    """Thread-safe store over one append-only log file."""

    def __init__(self, path: str | Path) -> None:
        self._path = Path(path)
        self._lock = threading.RLock()
        self._records: list[IngestRecord] = []
        self._by_key: dict[tuple[str, str, int], IngestRecord] = {}
        self._by_station: dict[str, list[IngestRecord]] = {}
        self.recovery_warning: str | None = None
        self._replay()
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self._path, "ab")

    # -- recovery --------------------------------------------------------

    def _replay(self) -> None:
        if not self._path.exists():
            return
        raw = self._path.read_bytes()
        if not raw:
            return
        complete = raw.endswith(b"\n")
        lines = raw.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        for idx, line in enumerate(lines):
            final = idx == len(lines) - 1
            try:
                record = IngestRecord.from_json(json.loads(line.decode("utf-8")))
                reason = _validate(record)
                if reason is not None:
                    raise ValueError(reason)
                key = dedup_key(record.reading)
                if key in self._by_key:
                    raise ValueError(f"duplicate dedup key {key}")
                if final and not complete:
                    raise ValueError("final record missing newline terminator")
            except (ValueError, UnicodeDecodeError) as exc:
                if final:
                    self.recovery_warning = (
                        f"discarded torn final record (line {idx + 1}): {exc}"
                    )
                    log.warning("%s: %s", self._path, self.recovery_warning)
                    return
                raise LogCorrupt(f"{self._path}: line {idx + 1}: {exc}") from exc
            self._index(record)

    def _index(self, record: IngestRecord) -> None:
        self._records.append(record)
        self._by_key[dedup_key(record.reading)] = record
        label = record.reading.station
        if label is not None:
            self._by_station.setdefault(label, []).append(record)

    # -- writes ----------------------------------------------------------

    def append_batch(
        self,
        items: list[object],
        source: str = "live",
        received_at: datetime | None = None,
    ) -> BatchResult:
        """Validate, dedup, durably append, and index a batch.

        Invalid items are itemized without blocking valid siblings;
        duplicates (by dedup key) are counted, not re-stored.  On a
        write failure the log is truncated back to its pre-batch length
        and StorageError is raised: nothing from the batch is kept.
        """
        now = received_at or datetime.now(timezone.utc).replace(microsecond=0)
        result = BatchResult()
        with self._lock:
            novel: list[IngestRecord] = []
            batch_keys: set[tuple[str, str, int]] = set()
            for index, item in enumerate(items):
                try:
                    record = IngestRecord(
                        reading=Reading.from_json(item), received_at=now, source=source
                    )
                except ValueError as exc:
                    result.rejected.append({"index": index, "reason": f"MalformedRecord: {exc}"})
                    continue
                reason = _validate(record)
                if reason is not None:
                    result.rejected.append({"index": index, "reason": reason})
                    continue
                key = dedup_key(record.reading)
                if key in self._by_key or key in batch_keys:
                    result.duplicates += 1
                    continue
                batch_keys.add(key)
                novel.append(record)
            if novel:
                self._append_durably(novel)
                for record in novel:
                    self._index(record)
            result.accepted = len(novel)
            result.accepted_records = novel
            return result

    def _append_durably(self, records: list[IngestRecord]) -> None:
        payload = b"".join(
            json.dumps(r.to_json(), separators=(",", ":"), sort_keys=True).encode("utf-8")
            + b"\n"
            for r in records
        )
        start = self._file.tell()
        try:
            self._file.write(payload)
            self._file.flush()
            os.fsync(self._file.fileno())
        except OSError as exc:
            try:
                self._file.truncate(start)
            except OSError:
                pass
            raise StorageError(f"log append failed: {exc}") from exc

    # -- reads (point-in-time snapshots under the lock) --------------------

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def snapshot(self) -> list[IngestRecord]:
        with self._lock:
            return list(self._records)

    def snapshot_by_time(self) -> list[IngestRecord]:
        # Stable sort keeps insertion order for equal timestamps.
        with self._lock:
            return sorted(self._records, key=lambda r: r.reading.timestamp)

    def station_labels(self) -> list[str]:
        with self._lock:
            return sorted(self._by_station)

    def station_readings(
        self,
        label: str,
        t_from: datetime | None = None,
        t_to: datetime | None = None,
    ) -> list[IngestRecord] | None:
        """Time-ordered records for one station, or None if unknown."""
        with self._lock:
            records = self._by_station.get(label)
            if records is None:
                return None
            picked = [
                r
                for r in records
                if (t_from is None or r.reading.timestamp >= t_from)
                and (t_to is None or r.reading.timestamp <= t_to)
            ]
        picked.sort(key=lambda r: r.reading.timestamp)
        return picked

    def summaries(self, season: str) -> list[StationSummary]:
        with self._lock:
            groups = {label: list(records) for label, records in self._by_station.items()}
        return [
            summarize_station([r.reading for r in groups[label]], season)
            for label in sorted(groups)
        ]

    def close(self) -> None:
        with self._lock:
            self._file.close()
