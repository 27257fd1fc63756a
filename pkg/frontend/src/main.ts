/** DOM wiring for the survey console. All state lives in ConsoleSession
 * and the latest snapshot; this module only renders and forwards events.
 */

import { fetchStations } from "./api.js";
import { BADGE_COLORS, badgeClass } from "./badges.js";
import { buildChartSvg } from "./chart.js";
import { ConsoleSession } from "./session.js";
import { SseClient } from "./sse.js";
import type { Assessment, ReadingEvent, Season, StationSummary } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

interface Settings {
  serviceUrl: string;
  token: string;
  season: Season;
  settleSeconds: number;
}

const SETTINGS_KEY = "aquasonde-console-settings";

function loadSettings(): Settings {
  const defaults: Settings = {
    serviceUrl: "http://127.0.0.1:8899",
    token: "",
    season: "summer",
    settleSeconds: 180,
  };
  try {
    return { ...defaults, ...JSON.parse(localStorage.getItem(SETTINGS_KEY) ?? "{}") };
  } catch {
    return defaults;
  }
}

const session = new ConsoleSession();
let settings = loadSettings();
let client: SseClient | null = null;
let stations: StationSummary[] = [];

function badge(assessment: Assessment): string {
  const cls = assessment.classification;
  return `<span class="badge ${badgeClass(cls)}" style="background:${BADGE_COLORS[cls]}">${cls}</span>`;
}

function renderStations(): void {
  const rows = stations
    .map(
      (s) => `<tr>
        <td>${s.station}</td><td>${s.count}</td>
        <td>${s.ph_mean.toFixed(2)} ${badge(s.ph_assessment)}</td>
        <td>${s.temp_mean.toFixed(2)} ${badge(s.temp_assessment)}</td>
      </tr>`,
    )
    .join("");
  $("station-body").innerHTML =
    rows || `<tr><td colspan="4" class="muted">no stations yet</td></tr>`;
  $("chart").innerHTML = buildChartSvg(stations, settings.season);
  const labels = stations.map((s) => s.station);
  const select = $<HTMLSelectElement>("arrive-station");
  const previous = select.value;
  select.innerHTML = labels.map((l) => `<option>${l}</option>`).join("");
  if (labels.includes(previous)) select.value = previous;
}

function renderRows(): void {
  const rows = session.rows
    .slice(0, 50)
    .map(
      (r) => `<tr>
        <td>${r.timestamp.replace("T", " ").replace("Z", "")}</td>
        <td>${r.station ?? "—"}</td>
        <td>${r.ph.toFixed(2)} ${badge(r.ph_assessment)}</td>
        <td>${r.temp_c.toFixed(2)} ${badge(r.temp_assessment)}</td>
      </tr>`,
    )
    .join("");
  $("reading-body").innerHTML =
    rows || `<tr><td colspan="4" class="muted">waiting for readings…</td></tr>`;
}

function renderDwell(): void {
  const now = Date.now();
  const commit = $<HTMLButtonElement>("commit");
  const abort = $<HTMLButtonElement>("abort");
  const arrive = $<HTMLButtonElement>("arrive");
  const status = $("dwell-status");
  if (session.activeStation !== null) {
    const remaining = session.remainingMs(now) ?? 0;
    arrive.disabled = true;
    abort.disabled = false;
    commit.disabled = remaining > 0;
    status.textContent =
      remaining > 0
        ? `settling at ${session.activeStation}: ${(remaining / 1000).toFixed(0)} s remaining`
        : `${session.activeStation} settled — commit when ready`;
  } else if (session.awaitingStation !== null) {
    arrive.disabled = true;
    abort.disabled = false;
    commit.disabled = true;
    status.textContent = `waiting for ${session.awaitingStation}'s reading from the capture agent…`;
  } else {
    arrive.disabled = false;
    abort.disabled = true;
    commit.disabled = true;
    status.textContent = "no active station";
  }
}

async function refreshStations(): Promise<void> {
  try {
    stations = await fetchStations(settings.serviceUrl, settings.season, settings.token);
    renderStations();
  } catch {
    // keep the previous table; the banner already shows connectivity
  }
}

function setBanner(state: "open" | "closed" | "connecting"): void {
  const banner = $("banner");
  banner.className = `banner banner-${state}`;
  banner.textContent =
    state === "open"
      ? "live"
      : state === "connecting"
        ? "connecting…"
        : "disconnected — retrying";
}

function connect(): void {
  client?.stop();
  session.abort();
  client = new SseClient(settings.serviceUrl, {
    token: settings.token || undefined,
    season: settings.season,
    onState: (state) => setBanner(state),
    onSnapshot: (snapshot) => {
      stations = snapshot.stations;
      renderStations();
    },
    onReading: (reading: ReadingEvent) => {
      const { resolvedCommit } = session.ingest(reading);
      renderRows();
      if (resolvedCommit) renderDwell();
      void refreshStations(); // summaries moved; re-pull the aggregates
    },
  });
  client.start();
}

function bind(): void {
  const urlInput = $<HTMLInputElement>("service-url");
  const tokenInput = $<HTMLInputElement>("token");
  const seasonSelect = $<HTMLSelectElement>("season");
  const settleInput = $<HTMLInputElement>("settle-seconds");
  urlInput.value = settings.serviceUrl;
  tokenInput.value = settings.token;
  seasonSelect.value = settings.season;
  settleInput.value = String(settings.settleSeconds);

  $("apply-settings").addEventListener("click", () => {
    settings = {
      serviceUrl: urlInput.value.trim(),
      token: tokenInput.value.trim(),
      season: (seasonSelect.value as Season) ?? "summer",
      settleSeconds: Math.max(0, Number(settleInput.value) || 0),
    };
    localStorage.setItem(SETTINGS_KEY, JSON.stringify(settings));
    connect();
    void refreshStations();
  });

  $("arrive").addEventListener("click", () => {
    const label = $<HTMLSelectElement>("arrive-station").value;
    if (!label) return;
    session.arrive(label, settings.settleSeconds, Date.now());
    renderDwell();
  });
  $("commit").addEventListener("click", () => {
    const result = session.commit(Date.now());
    if (!result.ok) {
      $("dwell-status").textContent = `blocked: ${(result.remainingMs / 1000).toFixed(1)} s left`;
    }
    renderDwell();
  });
  $("abort").addEventListener("click", () => {
    session.abort();
    renderDwell();
  });

  setInterval(renderDwell, 250);
  connect();
  void refreshStations();
}

document.addEventListener("DOMContentLoaded", bind);
