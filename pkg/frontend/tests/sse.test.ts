import { describe, expect, it } from "vitest";

import { SseClient, SseParser } from "../src/sse.js";
import type { ReadingEvent, SnapshotEvent } from "../src/types.js";
import { readingEvent } from "./helpers.js";

describe("SseParser", () => {
  it("parses a complete event block", () => {
    const parser = new SseParser();
    const events = parser.feed('event: reading\ndata: {"ph": 5.75}\n\n');
    expect(events).toEqual([{ event: "reading", data: '{"ph": 5.75}' }]);
  });

  it("reassembles events split across arbitrary chunks", () => {
    const parser = new SseParser();
    const whole = 'event: snapshot\ndata: {"stations": []}\n\nevent: reading\ndata: {"ph": 6}\n\n';
    const collected = [];
    for (const char of whole) collected.push(...parser.feed(char));
    expect(collected.map((e) => e.event)).toEqual(["snapshot", "reading"]);
  });

  it("ignores keepalive comments and joins multi-line data", () => {
    const parser = new SseParser();
    expect(parser.feed(": keepalive\n\n")).toEqual([]);
    const events = parser.feed("event: reading\ndata: line1\ndata: line2\n\n");
    expect(events).toEqual([{ event: "reading", data: "line1\nline2" }]);
  });

  it("handles CRLF line endings", () => {
    const parser = new SseParser();
    const events = parser.feed("event: reading\r\ndata: {}\r\n\r\n");
    expect(events).toEqual([{ event: "reading", data: "{}" }]);
  });
});

function sseResponse(...blocks: string[]): Response {
  const body = new ReadableStream<Uint8Array>({
    start(controller) {
      const encoder = new TextEncoder();
      for (const block of blocks) controller.enqueue(encoder.encode(block));
      controller.close();
    },
  });
  return new Response(body, { status: 200, headers: { "Content-Type": "text/event-stream" } });
}

const snapshotBlock = (stations = "[]") =>
  `event: snapshot\ndata: {"season": "summer", "stations": ${stations}}\n\n`;

const readingBlock = (event: ReadingEvent) => `event: reading\ndata: ${JSON.stringify(event)}\n\n`;

describe("SseClient", () => {
  it("dispatches snapshot then readings and recovers after a dropped stream", async () => {
    let connections = 0;
    const fetchImpl = (async () => {
      connections += 1;
      if (connections === 1) {
        return sseResponse(snapshotBlock(), readingBlock(readingEvent({ seq_origin: 1 })));
      }
      return sseResponse(snapshotBlock(), readingBlock(readingEvent({ seq_origin: 2 })));
    }) as typeof fetch;

    const snapshots: SnapshotEvent[] = [];
    const readings: ReadingEvent[] = [];
    const states: string[] = [];
    const client = new SseClient("http://service.test", {
      initialBackoffMs: 5,
      fetchImpl,
      onSnapshot: (s) => snapshots.push(s),
      onReading: (r) => readings.push(r),
      onState: (s) => states.push(s),
    });
    client.start();
    await waitFor(() => readings.length >= 2);
    client.stop();

    expect(connections).toBeGreaterThanOrEqual(2); // reconnected after EOF
    expect(snapshots.length).toBeGreaterThanOrEqual(2); // snapshot replays on reconnect
    expect(readings.map((r) => r.seq_origin)).toEqual([1, 2]);
    expect(states).toContain("open");
    expect(states).toContain("closed");
  });

  it("backs off while the service is down and resets once it is back", async () => {
    const attempts: number[] = [];
    let healthy = false;
    const fetchImpl = (async () => {
      attempts.push(Date.now());
      if (!healthy) throw new Error("connection refused");
      return sseResponse(snapshotBlock());
    }) as typeof fetch;

    const client = new SseClient("http://service.test", {
      initialBackoffMs: 10,
      maxBackoffMs: 40,
      fetchImpl,
      onSnapshot: () => undefined,
    });
    client.start();
    await waitFor(() => attempts.length >= 4);
    healthy = true;
    await waitFor(() => attempts.length >= 5);
    client.stop();

    // Gaps grow toward the cap while refused: 10, 20, 40, 40...
    const gaps = attempts.slice(1).map((t, i) => t - attempts[i]!);
    expect(gaps[1]).toBeGreaterThanOrEqual(gaps[0]!);
    expect(Math.max(...gaps)).toBeLessThan(200);
  });

  it("passes the bearer token and season through", async () => {
    let seenUrl = "";
    let seenAuth: string | null = null;
    const fetchImpl = (async (url: RequestInfo | URL, init?: RequestInit) => {
      seenUrl = String(url);
      seenAuth = new Headers(init?.headers).get("Authorization");
      return sseResponse(snapshotBlock());
    }) as typeof fetch;

    const client = new SseClient("http://service.test/", {
      token: "sesame",
      season: "winter",
      initialBackoffMs: 5,
      fetchImpl,
    });
    client.start();
    await waitFor(() => seenUrl !== "");
    client.stop();
    expect(seenUrl).toBe("http://service.test/v1/stream?season=winter");
    expect(seenAuth).toBe("Bearer sesame");
  });
});

async function waitFor(check: () => boolean, timeoutMs = 5000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
  throw new Error("condition not reached in time");
}
