"""Deterministic stand-in for the physical sensor node.

Plays a scenario script as the same byte stream the hardware would emit:
per frame, the ideal Nernstian electrode voltage of the station's true
pH at its true temperature plus Gaussian noise, quantized through the
inverse ADC maps.  Identical (script, seed) pairs produce byte-identical
streams.  The stream can be served over TCP with wall-clock pacing
(compressed by the script's time_scale) or written to a file for replay.
"""

from __future__ import annotations

import socket
import time
from dataclasses import dataclass
from typing import Callable, Iterator

from .calibration import adc_from_electrode_mv, adc_from_temp_c, ideal_calibration, mv_from_ph
from .rng import Xorshift64Star
from .scenario import ScenarioScript
from .wire import FLAG_PH_VALID, FLAG_TEMP_VALID, FRAME_SIZE, SensorFrame, encode_frame


class OffsetOutOfRange(ValueError):
    """A fault's offset or range falls outside the stream."""


@dataclass(frozen=True)
class DropBytes:
    """Remove bytes [start, stop) from the stream."""

    start: int
    stop: int


@dataclass(frozen=True)
class CorruptByte:
    """XOR the byte at offset with 0xFF (always changes it)."""

    offset: int


@dataclass(frozen=True)
class DuplicateFrame:
    """Insert a second copy of the frame-aligned 11 bytes at index."""

    index: int


Fault = DropBytes | CorruptByte | DuplicateFrame


def iter_frames(script: ScenarioScript) -> Iterator[SensorFrame]:
    """Generate the scripted frames in order, seq wrapping 255 -> 0."""
    script.validate()
    rng = Xorshift64Star(script.seed)
    electrode = ideal_calibration()
    seq = 0
    for station_idx, st in enumerate(script.stations):
        count = max(1, int(round(st.dwell_s * script.frame_rate_hz)))
        for j in range(count):
            mv = mv_from_ph(st.true_ph, electrode, st.true_temp_c)
            mv += rng.gauss(script.noise_mv_sigma)
            temp = st.true_temp_c + rng.gauss(script.noise_temp_sigma)
            temp = min(60.0, max(0.0, temp))
            # Battery drains one percent over the course of each station.
            battery = script.battery_start_pct - station_idx - (j + 1) / count
            yield SensorFrame(
                seq=seq,
                ph_adc=adc_from_electrode_mv(mv),
                temp_adc=adc_from_temp_c(temp),
                battery_pct=max(0, round(battery)),
                flags=FLAG_PH_VALID | FLAG_TEMP_VALID,
            )
            seq = (seq + 1) % 256


def simulate(script: ScenarioScript) -> bytes:
    """Whole scripted byte stream, deterministic in (script, seed)."""
    return b"".join(encode_frame(f) for f in iter_frames(script))


def frame_interval_s(script: ScenarioScript) -> float:
    """Wall-clock seconds between frames when serving live."""
    return 1.0 / (script.frame_rate_hz * script.time_scale)


def serve_stream(
    script: ScenarioScript,
    host: str = "127.0.0.1",
    port: int = 0,
    on_listening: Callable[[str, int], None] | None = None,
) -> int:
    """Serve the stream to one TCP client, paced against absolute deadlines.

    Pacing against start + k*interval (rather than sleeping per frame)
    keeps long runs from drifting.  Returns the number of frames sent;
    a client that disconnects early just ends the session.
    """
    data = simulate(script)
    interval = frame_interval_s(script)
    listener = socket.create_server((host, port))
    try:
        bound_host, bound_port = listener.getsockname()[:2]
        if on_listening is not None:
            on_listening(bound_host, bound_port)
        conn, _addr = listener.accept()
        with conn:
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            start = time.monotonic()
            sent = 0
            for offset in range(0, len(data), FRAME_SIZE):
                delay = start + sent * interval - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                try:
                    conn.sendall(data[offset : offset + FRAME_SIZE])
                except (BrokenPipeError, ConnectionResetError):
                    break
                sent += 1
            return sent
    finally:
        listener.close()


def inject_fault(stream: bytes, fault: Fault) -> bytes:
    """Apply one deterministic link fault to a byte stream."""
    if isinstance(fault, DropBytes):
        if not 0 <= fault.start <= fault.stop <= len(stream):
            raise OffsetOutOfRange(
                f"drop range [{fault.start}, {fault.stop}) outside stream of {len(stream)}"
            )
        return stream[: fault.start] + stream[fault.stop :]
    if isinstance(fault, CorruptByte):
        if not 0 <= fault.offset < len(stream):
            raise OffsetOutOfRange(
                f"offset {fault.offset} outside stream of {len(stream)}"
            )
        corrupted = bytearray(stream)
        corrupted[fault.offset] ^= 0xFF
        return bytes(corrupted)
    if isinstance(fault, DuplicateFrame):
        start = fault.index * FRAME_SIZE
        stop = start + FRAME_SIZE
        if not 0 <= start < stop <= len(stream):
            raise OffsetOutOfRange(
                f"frame index {fault.index} outside stream of {len(stream)} bytes"
            )
        return stream[:stop] + stream[start:stop] + stream[stop:]
    raise TypeError(f"unknown fault {fault!r}")
