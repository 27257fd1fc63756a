"""Scenario scripts: the ground truth the device simulator plays.

File format (see docs/file-formats.md): key = value settings plus a
``[stations]`` table of ``label longitude latitude true_ph true_temp_c
dwell_s`` rows, one station per line, visited in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .textconf import parse_plaintext

DEFAULT_FRAME_RATE_HZ = 1.0
DEFAULT_NOISE_MV_SIGMA = 1.0
DEFAULT_NOISE_TEMP_SIGMA = 0.05

BUNDLED_SCENARIO = "lahore-canal.scenario"


class ScenarioInvalid(ValueError):
    """The scenario violates a field range or uniqueness rule."""


@dataclass(frozen=True)
class ScenarioStation:
    label: str
    longitude: float
    latitude: float
    true_ph: float
    true_temp_c: float
    dwell_s: float


@dataclass(frozen=True)
class ScenarioScript:
    stations: tuple[ScenarioStation, ...] = field(default_factory=tuple)
    frame_rate_hz: float = DEFAULT_FRAME_RATE_HZ
    noise_mv_sigma: float = DEFAULT_NOISE_MV_SIGMA
    noise_temp_sigma: float = DEFAULT_NOISE_TEMP_SIGMA
    seed: int = 1
    battery_start_pct: int = 100
    time_scale: float = 1.0

    def validate(self) -> None:
        if not self.stations:
            raise ScenarioInvalid("scenario has no stations")
        labels = [s.label for s in self.stations]
        if len(set(labels)) != len(labels):
            raise ScenarioInvalid(f"station labels are not unique: {labels}")
        if self.frame_rate_hz <= 0:
            raise ScenarioInvalid("frame_rate_hz must be > 0")
        if self.time_scale <= 0:
            raise ScenarioInvalid("time_scale must be > 0")
        if self.noise_mv_sigma < 0 or self.noise_temp_sigma < 0:
            raise ScenarioInvalid("noise sigmas must be >= 0")
        if not 0 <= self.battery_start_pct <= 100:
            raise ScenarioInvalid("battery_start_pct must be 0-100")
        if not 0 <= self.seed < 2**64:
            raise ScenarioInvalid("seed must fit in 64 unsigned bits")
        for s in self.stations:
            if not s.label:
                raise ScenarioInvalid("station label must be nonempty")
            if not 0.0 <= s.true_ph <= 14.0:
                raise ScenarioInvalid(f"{s.label}: true_ph {s.true_ph} outside [0, 14]")
            if not 0.0 <= s.true_temp_c <= 60.0:
                raise ScenarioInvalid(
                    f"{s.label}: true_temp_c {s.true_temp_c} outside [0, 60]"
                )
            if not -180.0 <= s.longitude <= 180.0 or not -90.0 <= s.latitude <= 90.0:
                raise ScenarioInvalid(f"{s.label}: coordinates out of range")
            if s.dwell_s <= 0:
                raise ScenarioInvalid(f"{s.label}: dwell_s must be > 0")


def load_scenario(path: str | Path) -> ScenarioScript:
    """Parse and validate a scenario file."""
    kv, tables = parse_plaintext(Path(path).read_text(encoding="utf-8"))
    rows = tables.get("stations", [])
    stations = []
    for row in rows:
        if len(row) != 6:
            raise ScenarioInvalid(
                f"station row needs 6 columns (label lon lat ph temp dwell), got {row}"
            )
        try:
            stations.append(
                ScenarioStation(
                    label=row[0],
                    longitude=float(row[1]),
                    latitude=float(row[2]),
                    true_ph=float(row[3]),
                    true_temp_c=float(row[4]),
                    dwell_s=float(row[5]),
                )
            )
        except ValueError as exc:
            raise ScenarioInvalid(f"station row {row}: {exc}") from exc
    try:
        script = ScenarioScript(
            stations=tuple(stations),
            frame_rate_hz=float(kv.get("frame_rate_hz", DEFAULT_FRAME_RATE_HZ)),
            noise_mv_sigma=float(kv.get("noise_mv_sigma", DEFAULT_NOISE_MV_SIGMA)),
            noise_temp_sigma=float(kv.get("noise_temp_sigma", DEFAULT_NOISE_TEMP_SIGMA)),
            seed=int(kv.get("seed", 1)),
            battery_start_pct=int(kv.get("battery_start_pct", 100)),
            time_scale=float(kv.get("time_scale", 1.0)),
        )
    except ValueError as exc:
        raise ScenarioInvalid(f"bad scenario setting: {exc}") from exc
    script.validate()
    return script


def with_overrides(
    script: ScenarioScript,
    seed: int | None = None,
    time_scale: float | None = None,
) -> ScenarioScript:
    """Apply command-line overrides on top of a loaded scenario."""
    if seed is not None:
        script = replace(script, seed=seed)
    if time_scale is not None:
        script = replace(script, time_scale=time_scale)
    script.validate()
    return script


def bundled_scenario_path() -> Path:
    """Filesystem path of the packaged six-station canal scenario."""
    return Path(resources.files("aquasonde").joinpath(f"data/{BUNDLED_SCENARIO}"))
