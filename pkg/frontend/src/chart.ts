/** Per-station dual-series chart as an SVG markup string.
 *
 * Same numbers as the CLI report: pH means on the left axis with the
 * norm lines, temperature means on the right axis with the active
 * season's band. Norm bounds come from the server's assessments, not
 * local constants, so the console stays a pure renderer. Markers carry
 * data-series / data-station / data-value attributes for tests.
 */

import type { Season, StationSummary } from "./types.js";

const WIDTH = 640;
const HEIGHT = 360;
const MARGIN = { left: 56, right: 56, top: 40, bottom: 48 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const PH_AXIS: [number, number] = [0, 14];
const TEMP_AXIS: [number, number] = [0, 60];

function x(i: number, n: number): number {
  return MARGIN.left + ((i + 0.5) * PLOT_W) / n;
}

function yOf([low, high]: [number, number], value: number): number {
  return MARGIN.top + ((high - value) / (high - low)) * PLOT_H;
}

const esc = (text: string) =>
  text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export function buildChartSvg(summaries: StationSummary[], season: Season): string {
  if (summaries.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="80"><text x="10" y="40">no station data yet</text></svg>`;
  }
  const n = summaries.length;
  const first = summaries[0]!;
  const phBounds = [first.ph_assessment.norm_low, first.ph_assessment.norm_high];
  const tempBand = [first.temp_assessment.norm_low, first.temp_assessment.norm_high];
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="11">`,
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="14">pH and temperature by station (season: ${esc(season)})</text>`,
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#888"/>`,
  );
  const bandTop = yOf(TEMP_AXIS, tempBand[1]!);
  const bandHeight = yOf(TEMP_AXIS, tempBand[0]!) - bandTop;
  parts.push(
    `<rect class="temp-band" data-season="${esc(season)}" x="${MARGIN.left}" y="${bandTop.toFixed(2)}" width="${PLOT_W}" height="${bandHeight.toFixed(2)}" fill="#7db8e8" fill-opacity="0.25"/>`,
  );
  for (const bound of phBounds) {
    const y = yOf(PH_AXIS, bound!).toFixed(2);
    parts.push(
      `<line class="ph-norm" data-value="${bound}" x1="${MARGIN.left}" x2="${MARGIN.left + PLOT_W}" y1="${y}" y2="${y}" stroke="#c0392b" stroke-dasharray="6 4"/>`,
      `<text x="${MARGIN.left + 4}" y="${(Number(y) - 4).toFixed(2)}" fill="#c0392b">pH ${bound}</text>`,
    );
  }
  for (const value of [0, 7, 14]) {
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${(yOf(PH_AXIS, value) + 4).toFixed(2)}" text-anchor="end">${value}</text>`,
    );
  }
  for (const value of [0, 30, 60]) {
    parts.push(
      `<text x="${MARGIN.left + PLOT_W + 8}" y="${(yOf(TEMP_AXIS, value) + 4).toFixed(2)}">${value}</text>`,
    );
  }
  const series: Array<[string, string, [number, number], number[]]> = [
    ["ph", "#1f6fb2", PH_AXIS, summaries.map((s) => s.ph_mean)],
    ["temp", "#d98e04", TEMP_AXIS, summaries.map((s) => s.temp_mean)],
  ];
  for (const [name, color, axis, values] of series) {
    const points = values
      .map((v, i) => `${x(i, n).toFixed(2)},${yOf(axis, v).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline class="series-${name}" points="${points}" fill="none" stroke="${color}" stroke-width="2"/>`,
    );
    values.forEach((value, i) => {
      parts.push(
        `<circle data-series="${name}" data-station="${esc(summaries[i]!.station)}" data-value="${value.toFixed(2)}" cx="${x(i, n).toFixed(2)}" cy="${yOf(axis, value).toFixed(2)}" r="4" fill="${color}"/>`,
      );
    });
  }
  summaries.forEach((summary, i) => {
    parts.push(
      `<text x="${x(i, n).toFixed(2)}" y="${MARGIN.top + PLOT_H + 16}" text-anchor="middle">${esc(summary.station)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}
