"""ADC conversion and pH electrode calibration.

The glass electrode is modelled as linear (Nernstian) with its
isopotential point at pH 7:

    mv      = offset + slope_T * (ph - 7)
    slope_T = slope_ref * (T + 273.15) / (T_ref + 273.15)

A healthy electrode calibrated at 25 C has slope_ref close to the
Nernst value -59.16 mV/pH; the magnitude scales linearly with absolute
temperature.  Slopes outside 30-90 mV/pH in magnitude indicate a broken
or badly fouled electrode and are refused.

Signal conditioning: the bipolar electrode voltage rides on a 2500 mV
mid-rail so the 10-bit unipolar converter (0-1023 over 0-5000 mV) can
digitize it.  The temperature probe is mapped linearly over its 0-60 C
range; its true curve is unpublished, so the linear map is a documented
stand-in and isolated here should a better one become available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import NamedTuple

from .textconf import format_key_values, parse_plaintext

ADC_MAX = 1023
ADC_FULL_SCALE_MV = 5000.0
MID_RAIL_MV = 2500.0

TEMP_MIN_C = 0.0
TEMP_MAX_C = 60.0

PH_MIN = 0.0
PH_MAX = 14.0

KELVIN_OFFSET = 273.15

# Nominal Nernst slope at 25 C; sign is negative for a glass electrode.
NOMINAL_SLOPE_MV_PER_PH = -59.16
# Electrode-health sanity band on |slope|, mV/pH.
SLOPE_SANITY_MIN = 30.0
SLOPE_SANITY_MAX = 90.0
# Buffers closer than this give an ill-conditioned slope.
MIN_BUFFER_SEPARATION_PH = 1.0


class FieldOutOfRange(ValueError):
    """An input is outside the range the hardware can produce."""


class DegenerateCalibration(ValueError):
    """Buffer points too close together (or identical) to fit a slope."""


class ElectrodeFault(ValueError):
    """Fitted slope is outside the electrode-health sanity band."""


@dataclass(frozen=True)
class PhCalibration:
    """Electrode model: offset at pH 7, slope, and calibration temperature."""

    offset_mv: float
    slope_mv_per_ph: float
    ref_temp_c: float

    def __post_init__(self) -> None:
        if not SLOPE_SANITY_MIN <= abs(self.slope_mv_per_ph) <= SLOPE_SANITY_MAX:
            raise ElectrodeFault(
                f"slope {self.slope_mv_per_ph:.2f} mV/pH outside sanity band "
                f"[{SLOPE_SANITY_MIN:.0f}, {SLOPE_SANITY_MAX:.0f}]"
            )
        if not TEMP_MIN_C <= self.ref_temp_c <= TEMP_MAX_C:
            raise FieldOutOfRange(
                f"ref_temp_c {self.ref_temp_c} outside [{TEMP_MIN_C}, {TEMP_MAX_C}]"
            )

    def slope_at(self, water_temp_c: float) -> float:
        """Slope compensated to the water temperature (Kelvin-proportional)."""
        return self.slope_mv_per_ph * (
            (water_temp_c + KELVIN_OFFSET) / (self.ref_temp_c + KELVIN_OFFSET)
        )


@dataclass(frozen=True)
class BufferPoint:
    """A known-pH buffer solution and the millivolts the electrode read in it."""

    ph: float
    measured_mv: float

    def __post_init__(self) -> None:
        if not PH_MIN <= self.ph <= PH_MAX:
            raise FieldOutOfRange(f"buffer pH {self.ph} outside [{PH_MIN}, {PH_MAX}]")


class PhResult(NamedTuple):
    """A converted pH value plus whether it was pegged at a range limit."""

    ph: float
    clamped: bool


def ideal_calibration() -> PhCalibration:
    """Perfect electrode: zero offset, nominal Nernst slope at 25 C."""
    return PhCalibration(0.0, NOMINAL_SLOPE_MV_PER_PH, 25.0)


def electrode_mv_from_adc(ph_adc: int) -> float:
    """Electrode millivolts for a raw pH-channel ADC count.

    The converter sees the electrode signal shifted up by the 2500 mV
    mid-rail, so count 0 is -2500 mV and count 1023 is +2500 mV.
    """
    if not 0 <= ph_adc <= ADC_MAX:
        raise FieldOutOfRange(f"ph_adc {ph_adc} outside 0-{ADC_MAX}")
    return ph_adc * ADC_FULL_SCALE_MV / ADC_MAX - MID_RAIL_MV


def adc_from_electrode_mv(mv: float) -> int:
    """Inverse of :func:`electrode_mv_from_adc`: nearest count, clamped.

    Half-counts round up, matching a converter that truncates the
    conditioned voltage against bin edges.
    """
    count = math.floor((mv + MID_RAIL_MV) * ADC_MAX / ADC_FULL_SCALE_MV + 0.5)
    return min(ADC_MAX, max(0, count))


def temp_c_from_adc(temp_adc: int) -> float:
    """Water temperature for a raw temperature-channel ADC count."""
    if not 0 <= temp_adc <= ADC_MAX:
        raise FieldOutOfRange(f"temp_adc {temp_adc} outside 0-{ADC_MAX}")
    return temp_adc * TEMP_MAX_C / ADC_MAX


def adc_from_temp_c(temp_c: float) -> int:
    """Inverse of :func:`temp_c_from_adc`: nearest count, clamped."""
    count = math.floor(temp_c * ADC_MAX / TEMP_MAX_C + 0.5)
    return min(ADC_MAX, max(0, count))


def two_point_calibrate(p1: BufferPoint, p2: BufferPoint, temp_c: float) -> PhCalibration:
    """Fit offset and slope from two buffer readings taken at temp_c.

    Raises:
        DegenerateCalibration: buffers closer than 1 pH unit.
        ElectrodeFault: fitted |slope| outside the 30-90 mV/pH band.
    """
    if abs(p1.ph - p2.ph) < MIN_BUFFER_SEPARATION_PH:
        raise DegenerateCalibration(
            f"buffers {p1.ph} and {p2.ph} are closer than "
            f"{MIN_BUFFER_SEPARATION_PH} pH unit"
        )
    slope = (p2.measured_mv - p1.measured_mv) / (p2.ph - p1.ph)
    offset = p1.measured_mv - slope * (p1.ph - 7.0)
    return PhCalibration(offset_mv=offset, slope_mv_per_ph=slope, ref_temp_c=temp_c)


def ph_from_mv(mv: float, cal: PhCalibration, water_temp_c: float) -> PhResult:
    """Convert electrode millivolts to pH with temperature compensation.

    Out-of-range results peg at 0 or 14 like the meter's scale ends;
    the clamp is reported alongside the value rather than raised.
    """
    if not TEMP_MIN_C <= water_temp_c <= TEMP_MAX_C:
        raise FieldOutOfRange(
            f"water_temp_c {water_temp_c} outside [{TEMP_MIN_C}, {TEMP_MAX_C}]"
        )
    ph = 7.0 + (mv - cal.offset_mv) / cal.slope_at(water_temp_c)
    if ph < PH_MIN:
        return PhResult(PH_MIN, True)
    if ph > PH_MAX:
        return PhResult(PH_MAX, True)
    return PhResult(ph, False)


def mv_from_ph(ph: float, cal: PhCalibration, water_temp_c: float) -> float:
    """Exact inverse of :func:`ph_from_mv` on the unclamped interior."""
    if not TEMP_MIN_C <= water_temp_c <= TEMP_MAX_C:
        raise FieldOutOfRange(
            f"water_temp_c {water_temp_c} outside [{TEMP_MIN_C}, {TEMP_MAX_C}]"
        )
    return cal.offset_mv + cal.slope_at(water_temp_c) * (ph - 7.0)


def save_calibration(
    path: str | Path, cal: PhCalibration, calibrated_at: datetime | None = None
) -> None:
    """Write a calibration record file (plain-text key = value lines)."""
    when = calibrated_at or datetime.now(timezone.utc)
    text = format_key_values(
        "aquasonde pH calibration",
        {
            "offset_mv": repr(cal.offset_mv),
            "slope_mv_per_ph": repr(cal.slope_mv_per_ph),
            "ref_temp_c": repr(cal.ref_temp_c),
            "calibrated_at": when.strftime("%Y-%m-%dT%H:%M:%SZ"),
        },
    )
    Path(path).write_text(text, encoding="utf-8")


def load_calibration(path: str | Path) -> PhCalibration:
    """Read a calibration record file written by :func:`save_calibration`."""
    kv, _tables = parse_plaintext(Path(path).read_text(encoding="utf-8"))
    try:
        return PhCalibration(
            offset_mv=float(kv["offset_mv"]),
            slope_mv_per_ph=float(kv["slope_mv_per_ph"]),
            ref_temp_c=float(kv["ref_temp_c"]),
        )
    except KeyError as exc:
        raise ValueError(f"calibration file {path} is missing key {exc}") from exc
