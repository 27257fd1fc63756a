/** Shared fixtures for console tests. */

import type { Assessment, ReadingEvent, StationSummary } from "../src/types.js";

export function assessment(
  parameter: string,
  value: number,
  classification: Assessment["classification"],
  low: number,
  high: number,
  season: string | null = null,
): Assessment {
  return { parameter, value, classification, norm_low: low, norm_high: high, season };
}

export function readingEvent(overrides: Partial<ReadingEvent> = {}): ReadingEvent {
  const ph = overrides.ph ?? 5.75;
  const temp = overrides.temp_c ?? 26.86;
  return {
    timestamp: "2026-08-10T09:02:00Z",
    longitude: 74.379,
    latitude: 31.537,
    ph,
    temp_c: temp,
    device_id: "dev-1",
    station: "L3",
    seq_origin: 189,
    ph_assessment: assessment("ph", ph, ph < 6.5 ? "BelowNormal" : "Normal", 6.5, 8.4),
    temp_assessment: assessment(
      "temperature",
      temp,
      temp < 27 ? "BelowNormal" : "Normal",
      27,
      29,
      "summer",
    ),
    ...overrides,
  };
}

export function canalSummaries(season: "summer" | "winter" = "summer"): StationSummary[] {
  const bands = { summer: [27, 29], winter: [17, 19] }[season];
  return Array.from({ length: 6 }, (_, i) => {
    const ph = 5.33 + i * 0.21;
    const temp = 25.9 + i * 0.48;
    const tempClass =
      temp < bands[0]! ? "BelowNormal" : temp <= bands[1]! ? "Normal" : "AboveNormal";
    return {
      station: `L${i + 1}`,
      count: 1,
      ph_mean: ph,
      ph_min: ph,
      ph_max: ph,
      temp_mean: temp,
      temp_min: temp,
      temp_max: temp,
      ph_assessment: assessment("ph", ph, "BelowNormal", 6.5, 8.4),
      temp_assessment: assessment("temperature", temp, tempClass, bands[0]!, bands[1]!, season),
    };
  });
}
