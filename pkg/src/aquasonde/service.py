"""HTTP ingestion service: the survey's database server.

Accepts geotagged readings over HTTP, persists them through
:class:`~aquasonde.store.ReadingStore`, and serves queries, station
summaries, CSV export, and a server-sent-events push stream.  Endpoints
and wire formats are documented in docs/api.md.

Concurrency: the threading HTTP server runs each request on its own
thread; the store serializes writes internally and reads return
point-in-time snapshots.  Push fan-out never blocks ingestion — each
subscriber owns a bounded queue and is disconnected if it falls more
than the buffer behind.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlsplit

from .samples import SEASONS, assess_ph, assess_temperature, parse_timestamp, readings_to_csv
from .store import BatchResult, IngestRecord, ReadingStore, StorageError

log = logging.getLogger(__name__)

SUBSCRIBER_BUFFER = 256
KEEPALIVE_INTERVAL_S = 10.0

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".map": "application/json",
}


class _Subscriber:
    def __init__(self, season: str) -> None:
        self.season = season
        self.events: queue.Queue[tuple[str, dict]] = queue.Queue(maxsize=SUBSCRIBER_BUFFER)
        self.kicked = threading.Event()

    def offer(self, name: str, payload: dict) -> None:
        try:
            self.events.put_nowait((name, payload))
        except queue.Full:
            # Slow consumer: drop the connection rather than ingestion.
            self.kicked.set()


class IngestService:
    """Owns the store, the subscriber registry, and the HTTP server."""

    def __init__(
        self,
        store: ReadingStore,
        host: str = "127.0.0.1",
        port: int = 0,
        default_season: str = "summer",
        token: str | None = None,
        static_dir: str | Path | None = None,
    ) -> None:
        if default_season not in SEASONS:
            raise ValueError(f"default_season must be one of {SEASONS}")
        self.store = store
        self.default_season = default_season
        self.token = token or None
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        self._subscribers: set[_Subscriber] = set()
        self._sub_lock = threading.Lock()
        self._server = _HttpServer((host, port), _Handler, service=self)
        self._thread: threading.Thread | None = None

    # -- lifecycle ---------------------------------------------------------

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._server.server_address[:2]
        return str(host), int(port)

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def start(self) -> None:
        """Serve on a background thread (tests, embedded use)."""
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
        with self._sub_lock:
            for sub in self._subscribers:
                sub.kicked.set()
        self.store.close()

    # -- push fan-out --------------------------------------------------------

    def subscribe(self, season: str) -> _Subscriber:
        sub = _Subscriber(season)
        with self._sub_lock:
            self._subscribers.add(sub)
        return sub

    def unsubscribe(self, sub: _Subscriber) -> None:
        with self._sub_lock:
            self._subscribers.discard(sub)

    def publish(self, records: list[IngestRecord]) -> None:
        """Queue each newly accepted record to every live subscriber."""
        if not records:
            return
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for record in records:
            for sub in subscribers:
                sub.offer("reading", reading_event(record, sub.season))


def reading_event(record: IngestRecord, season: str) -> dict:
    """Push-stream payload: the stored record plus its assessments."""
    payload = record.to_json()
    payload["ph_assessment"] = assess_ph(record.reading.ph).to_json()
    payload["temp_assessment"] = assess_temperature(record.reading.temp_c, season).to_json()
    return payload


class _HttpServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, handler, service: IngestService) -> None:
        self.service = service
        super().__init__(addr, handler)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: _HttpServer

    # -- plumbing -----------------------------------------------------------

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s %s", self.address_string(), fmt % args)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, Authorization")

    def _send_json(self, status: int, payload: object) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_text(self, status: int, body: str, content_type: str) -> None:
        data = body.encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _season(self, query: dict[str, list[str]]) -> str | None:
        season = query.get("season", [self.server.service.default_season])[0]
        if season not in SEASONS:
            self._error(400, f"season must be one of {SEASONS}, got {season!r}")
            return None
        return season

    # -- routes ---------------------------------------------------------------

    def do_OPTIONS(self) -> None:  # noqa: N802 (http.server naming)
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:  # noqa: N802
        url = urlsplit(self.path)
        query = parse_qs(url.query)
        parts = [unquote(p) for p in url.path.split("/") if p]
        try:
            if parts == ["v1", "healthz"]:
                self._send_json(200, {"status": "ok", "readings": len(self.server.service.store)})
            elif parts == ["v1", "stations"]:
                self._get_stations(query)
            elif len(parts) == 4 and parts[:2] == ["v1", "stations"] and parts[3] == "readings":
                self._get_station_readings(parts[2], query)
            elif parts == ["v1", "export.csv"]:
                self._get_export(query)
            elif parts == ["v1", "stream"]:
                self._get_stream(query)
            else:
                self._get_static(url.path)
        except (BrokenPipeError, ConnectionResetError):
            pass

    def do_POST(self) -> None:  # noqa: N802
        url = urlsplit(self.path)
        parts = [p for p in url.path.split("/") if p]
        if parts != ["v1", "readings"]:
            self._error(404, f"no such endpoint: {url.path}")
            return
        service = self.server.service
        if service.token is not None:
            supplied = self.headers.get("Authorization", "")
            if supplied != f"Bearer {service.token}":
                self._error(401, "missing or invalid bearer token")
                return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            items = json.loads(self.rfile.read(length).decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            self._error(400, "body must be a JSON array of reading records")
            return
        if not isinstance(items, list):
            self._error(400, "body must be a JSON array of reading records")
            return
        source = parse_qs(url.query).get("source", ["live"])[0]
        if source not in ("live", "replay"):
            self._error(400, "source must be live or replay")
            return
        try:
            result: BatchResult = service.store.append_batch(items, source=source)
        except StorageError as exc:
            self._error(507, str(exc))
            return
        service.publish(result.accepted_records)
        self._send_json(200, result.to_json())

    # -- GET implementations ---------------------------------------------------

    def _get_stations(self, query: dict[str, list[str]]) -> None:
        season = self._season(query)
        if season is None:
            return
        summaries = self.server.service.store.summaries(season)
        self._send_json(200, [s.to_json() for s in summaries])

    def _get_station_readings(self, label: str, query: dict[str, list[str]]) -> None:
        try:
            t_from = parse_timestamp(query["from"][0]) if "from" in query else None
            t_to = parse_timestamp(query["to"][0]) if "to" in query else None
        except ValueError:
            self._error(400, "from/to must be ISO-8601 timestamps")
            return
        if t_from is not None and t_to is not None and t_from > t_to:
            self._error(400, "malformed interval: from > to")
            return
        records = self.server.service.store.station_readings(label, t_from, t_to)
        if records is None:
            self._error(404, f"unknown station {label!r}")
            return
        self._send_json(200, [r.to_json() for r in records])

    def _get_export(self, query: dict[str, list[str]]) -> None:
        flag = query.get("with_provenance", ["0"])[0].lower()
        with_provenance = flag in ("1", "true", "yes")
        records = self.server.service.store.snapshot_by_time()
        csv_text = readings_to_csv([r.reading for r in records], with_provenance)
        self._send_text(200, csv_text, "text/csv; charset=utf-8")

    def _get_stream(self, query: dict[str, list[str]]) -> None:
        season = self._season(query)
        if season is None:
            return
        service = self.server.service
        sub = service.subscribe(season)
        try:
            self.send_response(200)
            self._cors()
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.end_headers()
            snapshot = {
                "season": season,
                "stations": [s.to_json() for s in service.store.summaries(season)],
            }
            self._write_event("snapshot", snapshot)
            while not sub.kicked.is_set():
                try:
                    name, payload = sub.events.get(timeout=KEEPALIVE_INTERVAL_S)
                except queue.Empty:
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                self._write_event(name, payload)
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            service.unsubscribe(sub)

    def _write_event(self, name: str, payload: dict) -> None:
        data = json.dumps(payload)
        self.wfile.write(f"event: {name}\ndata: {data}\n\n".encode("utf-8"))
        self.wfile.flush()

    def _get_static(self, path: str) -> None:
        root = self.server.service.static_dir
        if root is None:
            self._error(404, f"no such endpoint: {path}")
            return
        relative = unquote(path).lstrip("/") or "index.html"
        target = (root / relative).resolve()
        if root not in target.parents and target != root:
            self._error(404, "not found")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._error(404, "not found")
            return
        content_type = _STATIC_TYPES.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def open_service(
    log_path: str | Path,
    host: str = "127.0.0.1",
    port: int = 0,
    default_season: str = "summer",
    token: str | None = None,
    static_dir: str | Path | None = None,
) -> IngestService:
    """Open (or recover) the store at log_path and bind the service."""
    store = ReadingStore(log_path)
    if store.recovery_warning:
        log.warning("recovery: %s", store.recovery_warning)
    return IngestService(
        store,
        host=host,
        port=port,
        default_season=default_season,
        token=token,
        static_dir=static_dir,
    )
