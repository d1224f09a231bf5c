/** Cursor-resumable event stream client.
 *
 * The service replays events from ?cursor=N and closes the stream after
 * the terminal "final" event. This client parses the text/event-stream
 * framing from a streamed fetch body, tracks the last event id it has
 * delivered, and on a dropped connection reconnects from the next cursor
 * so no event is lost or delivered twice.
 */

export interface StreamEvent {
  id: number;
  type: string;
  data: Record<string, unknown>;
}

export type StreamState = "connecting" | "open" | "reconnecting" | "closed";

export interface StreamOptions {
  onEvent: (event: StreamEvent) => void;
  onStateChange?: (state: StreamState) => void;
  /** Reconnect attempts after a drop before giving up. */
  maxRetries?: number;
  /** Delay between reconnect attempts, in milliseconds. */
  retryDelayMs?: number;
  fetchImpl?: typeof fetch;
}

/** Parse complete SSE blocks out of a text buffer.
 *
 * Returns the parsed events plus whatever trailing partial block must be
 * kept for the next chunk.
 */
export function parseSseBuffer(buffer: string): {
  events: StreamEvent[];
  rest: string;
} {
  const events: StreamEvent[] = [];
  const parts = buffer.split("\n\n");
  const rest = parts.pop() ?? "";
  for (const block of parts) {
    let id = -1;
    let type = "message";
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("id:")) id = Number(line.slice(3).trim());
      else if (line.startsWith("event:")) type = line.slice(6).trim();
      else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
    }
    if (dataLines.length === 0) continue;
    events.push({ id, type, data: JSON.parse(dataLines.join("\n")) });
  }
  return { events, rest };
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class EventStream {
  private urlFor: (cursor: number) => string;
  private options: StreamOptions;
  private cursor: number;
  private stopped = false;
  private sawFinal = false;

  constructor(
    urlFor: (cursor: number) => string,
    options: StreamOptions,
    startCursor = 0,
  ) {
    this.urlFor = urlFor;
    this.options = options;
    this.cursor = startCursor;
  }

  stop(): void {
    this.stopped = true;
  }

  private setState(state: StreamState): void {
    this.options.onStateChange?.(state);
  }

  /** Run the stream to completion (terminal event, stop(), or retry
   * budget exhausted). Resolves true if the terminal event arrived. */
  async run(): Promise<boolean> {
    const fetchImpl = this.options.fetchImpl ?? fetch;
    const maxRetries = this.options.maxRetries ?? 5;
    const retryDelayMs = this.options.retryDelayMs ?? 250;
    let retries = 0;
    this.setState("connecting");
    while (!this.stopped && !this.sawFinal) {
      try {
        await this.consumeOnce(fetchImpl);
        if (this.sawFinal || this.stopped) break;
        // Stream closed cleanly without a terminal event: the run went
        // idle. Nothing more is coming, so stop following.
        break;
      } catch {
        retries += 1;
        if (retries > maxRetries) break;
        this.setState("reconnecting");
        await sleep(retryDelayMs);
      }
    }
    this.setState("closed");
    return this.sawFinal;
  }

  private async consumeOnce(fetchImpl: typeof fetch): Promise<void> {
    const response = await fetchImpl(this.urlFor(this.cursor));
    if (!response.ok || response.body === null) {
      throw new Error(`stream request failed: ${response.status}`);
    }
    this.setState("open");
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    while (true) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const { events, rest } = parseSseBuffer(buffer);
      buffer = rest;
      for (const event of events) this.deliver(event);
      if (this.sawFinal || this.stopped) {
        await reader.cancel().catch(() => undefined);
        return;
      }
    }
  }

  private deliver(event: StreamEvent): void {
    // Drop anything already delivered; the cursor is the sole dedup rule.
    if (event.id < this.cursor) return;
    this.cursor = event.id + 1;
    this.options.onEvent(event);
    if (event.type === "final") this.sawFinal = true;
  }
}
