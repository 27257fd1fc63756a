/** Survey-session state: the dwell countdown and the live reading list.
 *
 * Pure logic: every method takes the current time in epoch ms, so tests
 * drive the clock directly. The console does no classification of its
 * own — rows carry the server's assessments verbatim.
 *
 * Invariants: at most one active station; a dwell deadline exists iff a
 * station is active; the row list is bounded, newest first, and keyed
 * by the service dedup key so reconnect replays never duplicate rows.
 */

import type { ReadingEvent, ReadingRecord } from "./types.js";

export function dedupKey(r: ReadingRecord): string {
  return `${r.device_id}|${r.timestamp}|${r.seq_origin}`;
}

export interface ReadingRow extends ReadingEvent {
  key: string;
}

export type CommitResult =
  | { ok: true; station: string }
  | { ok: false; remainingMs: number };

export interface IngestResult {
  added: boolean;
  resolvedCommit: boolean;
}

export const DEFAULT_ROW_LIMIT = 200;

export class ConsoleSession {
  readonly rows: ReadingRow[] = [];
  activeStation: string | null = null;
  dwellDeadlineMs: number | null = null;
  /** Station whose post-commit reading we are waiting to see on the stream. */
  awaitingStation: string | null = null;

  private readonly keys = new Set<string>();

  constructor(private readonly rowLimit: number = DEFAULT_ROW_LIMIT) {}

  arrive(label: string, settleSeconds: number, nowMs: number): void {
    if (this.activeStation !== null) {
      throw new Error(`already at station ${this.activeStation}; commit or abort first`);
    }
    if (!label) throw new Error("station label must be nonempty");
    this.activeStation = label;
    this.dwellDeadlineMs = nowMs + settleSeconds * 1000;
  }

  remainingMs(nowMs: number): number | null {
    if (this.dwellDeadlineMs === null) return null;
    return Math.max(0, this.dwellDeadlineMs - nowMs);
  }

  canCommit(nowMs: number): boolean {
    return this.activeStation !== null && (this.remainingMs(nowMs) ?? Infinity) === 0;
  }

  /** Blocked until the dwell countdown elapses; then arms the wait for
   * the station's reading to arrive from the capture agent. */
  commit(nowMs: number): CommitResult {
    if (this.activeStation === null) throw new Error("no active station");
    const remaining = this.remainingMs(nowMs) ?? 0;
    if (remaining > 0) {
      return { ok: false, remainingMs: remaining };
    }
    const station = this.activeStation;
    this.awaitingStation = station;
    this.activeStation = null;
    this.dwellDeadlineMs = null;
    return { ok: true, station };
  }

  abort(): void {
    this.activeStation = null;
    this.dwellDeadlineMs = null;
    this.awaitingStation = null;
  }

  ingest(event: ReadingEvent): IngestResult {
    const key = dedupKey(event);
    const resolvedCommit =
      this.awaitingStation !== null && event.station === this.awaitingStation;
    if (resolvedCommit) this.awaitingStation = null;
    if (this.keys.has(key)) {
      return { added: false, resolvedCommit };
    }
    this.keys.add(key);
    this.rows.unshift({ ...event, key });
    while (this.rows.length > this.rowLimit) {
      const dropped = this.rows.pop();
      if (dropped) this.keys.delete(dropped.key);
    }
    return { added: true, resolvedCommit };
  }
}
