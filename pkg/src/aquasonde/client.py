"""Minimal HTTP client for talking to the ingestion service."""

from __future__ import annotations

import json
import urllib.error
import urllib.request

DEFAULT_TIMEOUT_S = 10.0


class ServiceUnavailable(Exception):
    """The service endpoint could not be reached."""


class ServiceError(Exception):
    """The service answered with an error status."""

    def __init__(self, status: int, message: str) -> None:
        super().__init__(f"HTTP {status}: {message}")
        self.status = status


def _request(req: urllib.request.Request, timeout: float) -> bytes:
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.read()
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode("utf-8", errors="replace")
        raise ServiceError(exc.code, detail) from exc
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise ServiceUnavailable(f"{req.full_url}: {exc}") from exc


def post_readings(
    base_url: str,
    records: list[dict],
    token: str | None = None,
    timeout: float = DEFAULT_TIMEOUT_S,
) -> dict:
    """POST a batch to /v1/readings; returns the accept/duplicate counts."""
    headers = {"Content-Type": "application/json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    req = urllib.request.Request(
        base_url.rstrip("/") + "/v1/readings",
        data=json.dumps(records).encode("utf-8"),
        headers=headers,
        method="POST",
    )
    return json.loads(_request(req, timeout))


def get_json(url: str, timeout: float = DEFAULT_TIMEOUT_S) -> object:
    return json.loads(_request(urllib.request.Request(url), timeout))


def get_text(url: str, timeout: float = DEFAULT_TIMEOUT_S) -> str:
    return _request(urllib.request.Request(url), timeout).decode("utf-8")
