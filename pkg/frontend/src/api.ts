/** Thin fetch wrappers for the service's query endpoints. */

import type { Season, StationSummary } from "./types.js";

export async function fetchStations(
  baseUrl: string,
  season: Season,
  token?: string,
  fetchImpl: typeof fetch = fetch,
): Promise<StationSummary[]> {
  const headers: Record<string, string> = {};
  if (token) headers["Authorization"] = `Bearer ${token}`;
  const url = `${baseUrl.replace(/\/+$/, "")}/v1/stations?season=${season}`;
  const response = await fetchImpl(url, { headers });
  if (!response.ok) {
    throw new Error(`GET /v1/stations failed: ${response.status}`);
  }
  return (await response.json()) as StationSummary[];
}
