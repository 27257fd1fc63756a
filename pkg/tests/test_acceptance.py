"""Acceptance suite: one test per release criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one
ACCEPTANCE PASS line per criterion.
"""

from __future__ import annotations

import json
import random
import re
import subprocess
import sys
import time
import urllib.request

import pytest

from aquasonde import client
from aquasonde.calibration import (
    BufferPoint,
    ideal_calibration,
    ph_from_mv,
    two_point_calibrate,
)
from aquasonde.cli import main
from aquasonde.rng import Xorshift64Star
from aquasonde.samples import Classification, assess_ph, assess_temperature, readings_from_csv
from aquasonde.scenario import bundled_scenario_path, load_scenario
from aquasonde.simulator import CorruptByte, inject_fault
from aquasonde.wire import (
    FrameError,
    SensorFrame,
    StreamDecoder,
    decode_frame,
    decode_stream,
    encode_frame,
)

from .conftest import acceptance_details, canal_batch


def passed(detail: str) -> None:
    """Record the criterion's detail line for the terminal summary."""
    acceptance_details["pending"] = detail
    print(f"\nACCEPTANCE PASS: {detail}")


# -- criterion 1: canal replay end-to-end ---------------------------------------


def spawn_simulator(time_scale: float) -> tuple[subprocess.Popen, int]:
    proc = subprocess.Popen(
        [sys.executable, "-m", "aquasonde.cli", "simulate",
         "--scenario", str(bundled_scenario_path()),
         "--time-scale", str(time_scale), "--listen", "127.0.0.1:0"],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    assert proc.stdout is not None
    deadline = time.monotonic() + 15
    while time.monotonic() < deadline:
        line = proc.stdout.readline()
        found = re.search(r"serving device stream on [\d.]+:(\d+)", line)
        if found:
            return proc, int(found.group(1))
    proc.kill()
    raise AssertionError("simulator did not report its port")


def test_canal_replay_end_to_end(tmp_path, service):
    started = time.monotonic()
    scenario = load_scenario(bundled_scenario_path())
    truths = {s.label: s.true_ph for s in scenario.stations}

    simulator, port = spawn_simulator(time_scale=100.0)

    cal_path = tmp_path / "ideal.cal"
    assert main(["calibrate", "--buffer", "7:0", "--buffer", "4:177.48",
                 "--temp", "25", "--out", str(cal_path)]) == 0

    csv_path = tmp_path / "readings.csv"
    config = tmp_path / "session.conf"
    config.write_text(
        f"""device = tcp://127.0.0.1:{port}
calibration = {cal_path}
service = {service.url}
season = summer
settle_s = 180
avg_count = 10
time_scale = 100
csv_out = {csv_path}
device_id = canal-replay-01

[stations]
L1 74.475000 31.585000
L2 74.427000 31.561000
L3 74.379000 31.537000
L4 74.331000 31.513000
L5 74.283000 31.489000
L6 74.235000 31.465000
"""
    )
    assert main(["capture", "--config", str(config)]) == 0

    readings = readings_from_csv(csv_path.read_text())
    assert len(readings) == 6
    for reading in readings:
        truth = truths[reading.station]
        assert abs(reading.ph - truth) <= 0.1, (reading.station, reading.ph, truth)
        assert assess_ph(reading.ph).classification is Classification.BELOW_NORMAL

    # Uploaded and classified identically on the service side.
    summaries = json.loads(client.get_text(service.url + "/v1/stations"))
    assert len(summaries) == 6
    assert all(s["ph_assessment"]["classification"] == "BelowNormal" for s in summaries)

    assert main(["report", "--from", service.url, "--out", str(tmp_path / "survey")]) == 0
    table = (tmp_path / "survey.txt").read_text()
    station_rows = [line for line in table.splitlines() if line.startswith("L")]
    assert len(station_rows) == 6
    assert all("BelowNormal" in row for row in station_rows)

    # Source equivalence: the capture CSV yields the byte-identical report.
    assert main(["report", "--from", str(csv_path), "--out", str(tmp_path / "local")]) == 0
    assert (tmp_path / "local.txt").read_bytes() == (tmp_path / "survey.txt").read_bytes()

    simulator.wait(timeout=30)
    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"pipeline took {elapsed:.1f}s"
    passed(
        "canal replay end-to-end: 6 readings, pH within ±0.1 of truth, "
        f"all BelowNormal, {elapsed:.1f}s wall"
    )


# -- criterion 2: calibration vs analytic oracle ---------------------------------


def test_calibration_against_nernst_oracle():
    # Oracle electrode: slope magnitude 2.303*R*T/F at 25 C, isopotential pH 7.
    nernst_mv = 2.303 * 8.314 * 298.15 / 96485.0 * 1000.0

    def electrode_mv(ph: float) -> float:
        return -nernst_mv * (ph - 7.0)

    cal = two_point_calibrate(
        BufferPoint(7.00, electrode_mv(7.00)),
        BufferPoint(4.00, electrode_mv(4.00)),
        25.0,
    )
    assert cal.slope_mv_per_ph == pytest.approx(-59.16, abs=0.01)

    worst_clean = 0.0
    steps = int(14 / 0.25) + 1
    for i in range(steps):
        ph = i * 0.25
        recovered = ph_from_mv(electrode_mv(ph), cal, 25.0).ph
        worst_clean = max(worst_clean, abs(recovered - ph))
    assert worst_clean < 0.01

    rng = Xorshift64Star(20260810)
    worst_noisy = 0.0
    for trial in range(1000):
        ph = (trial % 141) / 10.0  # cycle 0.0-14.0
        estimates = [
            ph_from_mv(electrode_mv(ph) + rng.gauss(1.0), cal, 25.0).ph
            for _ in range(10)
        ]
        estimate = sum(estimates) / len(estimates)
        worst_noisy = max(worst_noisy, abs(estimate - ph))
    assert worst_noisy < 0.1
    passed(
        f"calibration oracle: slope -59.16±0.01, clean sweep err {worst_clean:.2e} < 0.01, "
        f"noisy (1 mV, avg 10, 1000 trials) err {worst_noisy:.3f} < 0.1"
    )


# -- criterion 3: protocol properties ---------------------------------------------


def random_frame(rng: random.Random) -> SensorFrame:
    return SensorFrame(
        seq=rng.randrange(256),
        ph_adc=rng.randrange(1024),
        temp_adc=rng.randrange(1024),
        battery_pct=rng.randrange(101),
        flags=rng.randrange(4),
    )


def test_protocol_properties():
    rng = random.Random(0xA55A)

    # 10,000 randomized frames round-trip exactly.
    for _ in range(10_000):
        frame = random_frame(rng)
        assert decode_frame(encode_frame(frame)) == frame

    # 100% detection of single-byte corruption at each of bytes 2-10.
    detected = 0
    attempts = 0
    for _ in range(40):
        encoded = encode_frame(random_frame(rng))
        for position in range(2, 11):
            delta = rng.randrange(1, 256)
            corrupted = bytearray(encoded)
            corrupted[position] = (corrupted[position] + delta) % 256
            attempts += 1
            if isinstance(decode_frame(bytes(corrupted)), FrameError):
                detected += 1
    assert detected == attempts == 40 * 9

    # Chunking invariance over 100 random split patterns of a 50-frame stream.
    stream = b"".join(encode_frame(random_frame(rng)) for _ in range(50))
    blob = bytearray(stream)
    blob[137] ^= 0x40  # one corrupt byte so the error path is exercised too
    blob = bytes(blob)
    reference = decode_stream(blob)
    for _ in range(100):
        cuts = sorted(rng.randrange(len(blob) + 1) for _ in range(rng.randrange(1, 12)))
        decoder = StreamDecoder()
        frames, errors = [], []
        previous = 0
        for cut in cuts + [len(blob)]:
            got_frames, got_errors = decoder.feed(blob[previous:cut])
            frames.extend(got_frames)
            errors.extend(got_errors)
            previous = cut
        errors.extend(decoder.flush())
        assert (frames, errors) == reference

    # Resync recovers every intact frame from a stream with 10 corruption faults.
    frames_in = [random_frame(rng) for _ in range(60)]
    stream = b"".join(encode_frame(f) for f in frames_in)
    corrupt_indexes = sorted(rng.sample(range(60), 10))
    for index in corrupt_indexes:
        offset = index * 11 + rng.randrange(11)
        stream = inject_fault(stream, CorruptByte(offset=offset))
    decoded, _errors = decode_stream(stream)
    intact = [f for i, f in enumerate(frames_in) if i not in corrupt_indexes]
    for frame in intact:
        assert frame in decoded
    passed(
        "protocol properties: 10k round-trips, 360/360 corruptions detected, "
        "100 split patterns invariant, 50/50 intact frames recovered past 10 faults"
    )


# -- criterion 4: service durability & idempotency ---------------------------------


def spawn_service(log_path) -> tuple[subprocess.Popen, str]:
    proc = subprocess.Popen(
        [sys.executable, "-m", "aquasonde.cli", "serve",
         "--listen", "127.0.0.1:0", "--log", str(log_path)],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    assert proc.stdout is not None
    deadline = time.monotonic() + 15
    while time.monotonic() < deadline:
        line = proc.stdout.readline()
        found = re.search(r"listening on (http://[\d.]+:\d+)", line)
        if found:
            return proc, found.group(1)
    proc.kill()
    raise AssertionError("service did not report its listen address")


def get_json(url: str):
    with urllib.request.urlopen(url, timeout=10) as resp:
        return json.loads(resp.read())


def test_service_durability_and_idempotency(tmp_path):
    log_path = tmp_path / "durable.log"

    proc, url = spawn_service(log_path)
    try:
        result = client.post_readings(url, canal_batch())
        assert (result["accepted"], result["duplicates"]) == (6, 0)
    finally:
        proc.kill()  # SIGKILL: no shutdown hooks may save us
        proc.wait(timeout=10)

    proc, url = spawn_service(log_path)
    try:
        assert get_json(url + "/v1/healthz")["readings"] == 6
        rows = client.get_text(url + "/v1/export.csv").splitlines()
        assert len(rows) == 7  # header + all six survived the kill

        repost = client.post_readings(url, canal_batch())
        assert repost == {"accepted": 0, "duplicates": 6, "rejected": []}
    finally:
        proc.kill()
        proc.wait(timeout=10)

    # Torn final record: keep every earlier record, drop only the tail.
    raw = log_path.read_bytes()
    lines = raw.splitlines(keepends=True)
    assert len(lines) == 6
    log_path.write_bytes(b"".join(lines[:5]) + lines[5][: len(lines[5]) // 2])

    proc, url = spawn_service(log_path)
    try:
        assert get_json(url + "/v1/healthz")["readings"] == 5
        repost = client.post_readings(url, canal_batch())
        assert (repost["accepted"], repost["duplicates"]) == (1, 5)
    finally:
        proc.kill()
        proc.wait(timeout=10)
    passed(
        "service durability & idempotency: kill -9 lost nothing acknowledged, "
        "re-POST was pure duplicates, torn tail dropped with earlier records intact"
    )


# -- criterion 5: classification oracle ----------------------------------------------


def test_classification_brute_force_oracle():
    def oracle(value: float, low: float, high: float) -> Classification:
        if value < low:
            return Classification.BELOW_NORMAL
        elif low <= value <= high:
            return Classification.NORMAL
        else:
            return Classification.ABOVE_NORMAL

    checked = 0
    for i in range(0, 1401):
        ph = i / 100
        assert assess_ph(ph).classification is oracle(ph, 6.5, 8.4), ph
        checked += 1
    for season, (low, high) in (("winter", (17.0, 19.0)), ("summer", (27.0, 29.0))):
        for i in range(0, 6001):
            temp = i / 100
            assert assess_temperature(temp, season).classification is oracle(
                temp, low, high
            ), (season, temp)
            checked += 1
    # Inclusive boundaries, spelled out.
    assert assess_ph(6.5).classification is Classification.NORMAL
    assert assess_ph(8.4).classification is Classification.NORMAL
    assert assess_temperature(17.0, "winter").classification is Classification.NORMAL
    assert assess_temperature(19.0, "winter").classification is Classification.NORMAL
    assert assess_temperature(27.0, "summer").classification is Classification.NORMAL
    assert assess_temperature(29.0, "summer").classification is Classification.NORMAL
    passed(f"classification oracle: {checked} sweep points match the band rules exactly")
