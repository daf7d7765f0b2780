// Live journal subscription. Prefers server-sent events; when EventSource is
// unavailable or keeps failing, reports "polling" so the caller can fall back
// to periodic API refreshes. Either way the console keeps working.

import type { JournalEntry } from "./types.js";

export type StreamState = "live" | "connecting" | "polling";

export interface StreamHandle {
  close(): void;
}

/** Reconnect delay: 500 ms doubling to an 8 s ceiling. */
export function backoffDelayMs(attempt: number): number {
  return Math.min(500 * 2 ** attempt, 8000);
}

/** Give up on SSE after this many consecutive failed connections. */
export const MAX_SSE_ATTEMPTS = 4;

export function subscribeJournal(
  url: string,
  onEntry: (entry: JournalEntry) => void,
  onState: (state: StreamState) => void,
): StreamHandle {
  if (typeof EventSource === "undefined") {
    onState("polling");
    return { close() {} };
  }

  let source: EventSource | null = null;
  let retryTimer: ReturnType<typeof setTimeout> | null = null;
  let attempts = 0;
  let closed = false;

  const connect = (): void => {
    if (closed) return;
    onState("connecting");
    source = new EventSource(url);
    source.onopen = () => {
      attempts = 0;
      onState("live");
    };
    source.onmessage = (event: MessageEvent<string>) => {
      onEntry(JSON.parse(event.data) as JournalEntry);
    };
    source.onerror = () => {
      // The browser's automatic retry is replaced with our own so we can
      // count failures and downgrade to polling.
      source?.close();
      source = null;
      attempts += 1;
      if (attempts >= MAX_SSE_ATTEMPTS) {
        onState("polling");
        return;
      }
      onState("connecting");
      retryTimer = setTimeout(connect, backoffDelayMs(attempts));
    };
  };

  connect();
  return {
    close() {
      closed = true;
      if (retryTimer !== null) clearTimeout(retryTimer);
      source?.close();
    },
  };
}
