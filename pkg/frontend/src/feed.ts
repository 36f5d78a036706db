/**
 * Live notification feed: an incremental server-sent-events parser, a render
 * model that deduplicates redelivered notifications, and the reconnect
 * backoff schedule.
 */

import { NotificationDoc, TraceRecord } from "./api.js";
import { DEFAULT_POLL_MS } from "./status.js";

export interface SseFrame {
  id?: string;
  data?: string;
  comment?: string;
}

/** Incremental SSE wire parser. Feed it decoded chunks of any size; it
 * returns the frames completed by each chunk. */
export class SseParser {
  private buffer = "";
  private id: string | undefined;
  private data: string[] = [];
  private comments: string[] = [];

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    for (;;) {
      const nl = this.buffer.search(/\r\n|\r|\n/);
      if (nl < 0) break;
      const line = this.buffer.slice(0, nl);
      const sep = this.buffer.slice(nl);
      this.buffer = this.buffer.slice(nl + (sep.startsWith("\r\n") ? 2 : 1));
      const frame = this.line(line);
      if (frame) frames.push(frame);
    }
    return frames;
  }

  private line(line: string): SseFrame | null {
    if (line === "") return this.dispatch();
    if (line.startsWith(":")) {
      this.comments.push(line.slice(1).trimStart());
      return null;
    }
    const colon = line.indexOf(":");
    const field = colon < 0 ? line : line.slice(0, colon);
    let value = colon < 0 ? "" : line.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "id") this.id = value;
    else if (field === "data") this.data.push(value);
    return null;
  }

  private dispatch(): SseFrame | null {
    if (this.data.length === 0 && this.id === undefined) {
      const hadComment = this.comments.length > 0;
      const comment = this.comments.join("\n");
      this.comments = [];
      return hadComment ? { comment } : null;
    }
    const frame: SseFrame = {};
    if (this.id !== undefined) frame.id = this.id;
    if (this.data.length > 0) frame.data = this.data.join("\n");
    if (this.comments.length > 0) frame.comment = this.comments.join("\n");
    this.id = undefined;
    this.data = [];
    this.comments = [];
    return frame;
  }
}

export function parseNotification(data: string): NotificationDoc {
  const doc = JSON.parse(data);
  if (typeof doc.event_id !== "string" || typeof doc.sub_id !== "string") {
    throw new Error("frame is not a notification");
  }
  return doc as NotificationDoc;
}

/** One display line per derivation step; an empty list means the match was
 * purely syntactic. */
export function traceRows(n: Pick<NotificationDoc, "trace">): string[] {
  return n.trace.map((r: TraceRecord) =>
    r.hops > 0 ? `${r.stage}: ${r.detail} [+${r.hops}]` : `${r.stage}: ${r.detail}`,
  );
}

export interface FeedRow {
  key: string;
  receivedAt: number;
  notification: NotificationDoc;
  traceRows: string[];
}

export const MAX_FEED_ROWS = 200;

export class FeedModel {
  readonly rows: FeedRow[] = [];
  private readonly seen = new Set<string>();

  /** Newest first; returns null (and renders nothing) for a notification
   * already shown, keyed on event_id + sub_id. */
  add(n: NotificationDoc, receivedAt = Date.now()): FeedRow | null {
    const key = `${n.event_id}:${n.sub_id}`;
    if (this.seen.has(key)) return null;
    this.seen.add(key);
    const row: FeedRow = {
      key,
      receivedAt,
      notification: n,
      traceRows: traceRows(n),
    };
    this.rows.unshift(row);
    if (this.rows.length > MAX_FEED_ROWS) this.rows.pop();
    return row;
  }
}

/** 500ms, 1s, 2s, ... capped at 10s. */
export function backoffMs(attempt: number): number {
  return Math.min(500 * 2 ** attempt, 10_000);
}

/** Polls the queue transport and hands each notification to a sink. Safe to
 * run alongside a live stream; the feed model's dedupe absorbs overlap. */
export class DrainLoop {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly drain: () => Promise<NotificationDoc[]>,
    private readonly sink: (n: NotificationDoc) => void,
    private readonly onState: (error?: Error) => void = () => {},
    readonly intervalMs: number = DEFAULT_POLL_MS,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async tick(): Promise<void> {
    try {
      for (const n of await this.drain()) this.sink(n);
      this.onState();
    } catch (err) {
      this.onState(err as Error);
    }
  }
}
