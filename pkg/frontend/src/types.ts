/** Wire types mirroring the service API (docs/api.md in the repo root). */

export type Classification = "BelowNormal" | "Normal" | "AboveNormal";

export type Season = "summer" | "winter";

export interface Assessment {
  parameter: string;
  value: number;
  classification: Classification;
  norm_low: number;
  norm_high: number;
  season: string | null;
}

export interface ReadingRecord {
  timestamp: string;
  longitude: number;
  latitude: number;
  ph: number;
  temp_c: number;
  device_id: string;
  station: string | null;
  seq_origin: number;
  received_at?: string;
  source?: string;
}

/** Push-stream payload: the stored record plus server-side assessments. */
export interface ReadingEvent extends ReadingRecord {
  ph_assessment: Assessment;
  temp_assessment: Assessment;
}

export interface StationSummary {
  station: string;
  count: number;
  ph_mean: number;
  ph_min: number;
  ph_max: number;
  temp_mean: number;
  temp_min: number;
  temp_max: number;
  ph_assessment: Assessment;
  temp_assessment: Assessment;
}

export interface SnapshotEvent {
  season: string;
  stations: StationSummary[];
}
