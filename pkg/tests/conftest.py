"""Shared fixtures (in-process service, SSE reader) and the acceptance
terminal summary: one PASS/FAIL line per criterion on every run."""

from __future__ import annotations

import http.client
import json
import queue
import threading
from datetime import datetime, timezone

import pytest

from aquasonde.service import IngestService
from aquasonde.store import ReadingStore

T0 = datetime(2026, 8, 10, 9, 0, 0, tzinfo=timezone.utc)

acceptance_lines: list[str] = []
acceptance_details: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in item.nodeid:
        status = "PASS" if report.passed else "FAIL"
        detail = acceptance_details.pop("pending", item.name)
        acceptance_lines.append(f"ACCEPTANCE {status}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


def canal_batch(device="dev-1", base=T0):
    """Six plausible canal readings, one per station."""
    rows = []
    for i in range(6):
        rows.append(
            {
                "timestamp": base.replace(minute=i).strftime("%Y-%m-%dT%H:%M:%SZ"),
                "longitude": 74.475 - i * 0.048,
                "latitude": 31.585 - i * 0.024,
                "ph": 5.33 + i * 0.21,
                "temp_c": 25.9 + i * 0.48,
                "device_id": device,
                "station": f"L{i + 1}",
                "seq_origin": i,
            }
        )
    return rows


@pytest.fixture
def service(tmp_path):
    svc = IngestService(ReadingStore(tmp_path / "readings.log"))
    svc.start()
    yield svc
    svc.shutdown()


class SseReader:
    """Background reader for one /v1/stream subscription."""

    def __init__(self, host: str, port: int, path: str = "/v1/stream"):
        self.events: queue.Queue[tuple[str, dict]] = queue.Queue()
        self._conn = http.client.HTTPConnection(host, port, timeout=15)
        self._conn.request("GET", path)
        self._resp = self._conn.getresponse()
        assert self._resp.status == 200
        self._thread = threading.Thread(target=self._pump, daemon=True)
        self._thread.start()

    def _pump(self) -> None:
        name = None
        data_lines: list[str] = []
        try:
            for raw in self._resp:
                line = raw.decode("utf-8").rstrip("\n")
                if line.startswith(":"):
                    continue
                if line.startswith("event:"):
                    name = line[len("event:") :].strip()
                elif line.startswith("data:"):
                    data_lines.append(line[len("data:") :].strip())
                elif line == "" and name is not None:
                    self.events.put((name, json.loads("\n".join(data_lines))))
                    name, data_lines = None, []
        except (OSError, ValueError):
            pass

    def next_event(self, timeout: float = 5.0) -> tuple[str, dict]:
        return self.events.get(timeout=timeout)

    def close(self) -> None:
        self._conn.close()
