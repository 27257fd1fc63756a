/** Server-sent-events client over fetch streaming.
 *
 * fetch (rather than EventSource) so the subscription can carry an
 * Authorization header and run under node for the integration tests.
 * Reconnects with exponential backoff; the caller dedups rows, so a
 * reconnect never duplicates state.
 */

import type { ReadingEvent, SnapshotEvent } from "./types.js";

export interface SseEvent {
  event: string;
  data: string;
}

/** Incremental parser for the text/event-stream format. */
export class SseParser {
  private buffer = "";

  feed(chunk: string): SseEvent[] {
    this.buffer += chunk.replace(/\r\n/g, "\n");
    const events: SseEvent[] = [];
    let boundary: number;
    while ((boundary = this.buffer.indexOf("\n\n")) !== -1) {
      const block = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      let name = "message";
      const data: string[] = [];
      for (const line of block.split("\n")) {
        if (line.startsWith(":") || line === "") continue;
        if (line.startsWith("event:")) name = line.slice(6).trim();
        else if (line.startsWith("data:")) data.push(line.slice(5).trim());
      }
      if (data.length > 0) events.push({ event: name, data: data.join("\n") });
    }
    return events;
  }
}

export type StreamState = "connecting" | "open" | "closed";

export interface SseClientOptions {
  token?: string;
  season?: string;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  onSnapshot?: (snapshot: SnapshotEvent) => void;
  onReading?: (reading: ReadingEvent) => void;
  onState?: (state: StreamState) => void;
  fetchImpl?: typeof fetch;
}

export class SseClient {
  private stopped = false;
  private controller: AbortController | null = null;
  private backoffMs: number;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;
  private readonly fetchImpl: typeof fetch;

  constructor(private readonly baseUrl: string, private readonly opts: SseClientOptions = {}) {
    this.initialBackoffMs = opts.initialBackoffMs ?? 1000;
    this.maxBackoffMs = opts.maxBackoffMs ?? 30_000;
    this.backoffMs = this.initialBackoffMs;
    this.fetchImpl = opts.fetchImpl ?? fetch;
  }

  start(): void {
    this.stopped = false;
    void this.run();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private streamUrl(): string {
    const season = this.opts.season ? `?season=${encodeURIComponent(this.opts.season)}` : "";
    return `${this.baseUrl.replace(/\/+$/, "")}/v1/stream${season}`;
  }

  private async run(): Promise<void> {
    while (!this.stopped) {
      this.opts.onState?.("connecting");
      try {
        await this.consumeOnce();
      } catch {
        // fall through to reconnect
      }
      if (this.stopped) break;
      this.opts.onState?.("closed");
      await sleep(this.backoffMs);
      this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
    }
    this.opts.onState?.("closed");
  }

  private async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const headers: Record<string, string> = { Accept: "text/event-stream" };
    if (this.opts.token) headers["Authorization"] = `Bearer ${this.opts.token}`;
    const response = await this.fetchImpl(this.streamUrl(), {
      headers,
      signal: this.controller.signal,
    });
    if (!response.ok || response.body === null) {
      throw new Error(`stream request failed: ${response.status}`);
    }
    this.opts.onState?.("open");
    this.backoffMs = this.initialBackoffMs; // healthy connection resets backoff
    const parser = new SseParser();
    const decoder = new TextDecoder();
    const reader = response.body.getReader();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
        this.dispatch(event);
      }
    }
  }

  private dispatch(event: SseEvent): void {
    if (event.event === "snapshot") {
      this.opts.onSnapshot?.(JSON.parse(event.data) as SnapshotEvent);
    } else if (event.event === "reading") {
      this.opts.onReading?.(JSON.parse(event.data) as ReadingEvent);
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
