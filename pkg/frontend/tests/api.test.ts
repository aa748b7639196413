import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, SocketLike, StreamClient } from "../src/api";

function fakeFetch(status: number, body: unknown) {
  const calls: { url: string; init?: Record<string, unknown> }[] = [];
  const impl = async (url: string, init?: Record<string, unknown>) => {
    calls.push({ url, init });
    return { status, json: async () => body };
  };
  return { impl, calls };
}

describe("ApiClient", () => {
  it("creates sessions against the documented endpoint", async () => {
    const { impl, calls } = fakeFetch(201, { session_id: "abc123" });
    const client = new ApiClient("http://svc", impl as never);
    expect(await client.createSession(2)).toBe("abc123");
    expect(calls[0].url).toBe("http://svc/sessions");
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({ scenario_id: 2 });
  });

  it("submits commands with text and shots", async () => {
    const { impl, calls } = fakeFetch(200, { execution_status: "Running" });
    const client = new ApiClient("http://svc", impl as never);
    await client.submitCommand("abc", "form a line", 2);
    expect(calls[0].url).toBe("http://svc/sessions/abc/command");
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({
      text: "form a line",
      shots: 2,
    });
  });

  it("wraps 503 responses in ApiError with the detail payload", async () => {
    const { impl } = fakeFetch(503, {
      detail: { stage_error: { stage: "generate", message: "unreachable" } },
    });
    const client = new ApiClient("http://svc", impl as never);
    const error = await client.stop("abc").catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(503);
    expect((error as ApiError).message).toContain("unreachable");
  });
});

class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  closedByClient = false;
  close(): void {
    this.closedByClient = true;
  }
}

describe("StreamClient", () => {
  it("delivers parsed messages after opening", () => {
    const sockets: FakeSocket[] = [];
    const messages: unknown[] = [];
    const statuses: string[] = [];
    const client = new StreamClient(
      "ws://svc/stream",
      { onMessage: (m) => messages.push(m), onStatus: (s) => statuses.push(s) },
      () => {
        const socket = new FakeSocket();
        sockets.push(socket);
        return socket;
      },
    );
    client.connect();
    sockets[0].onopen?.();
    sockets[0].onmessage?.({ data: JSON.stringify({ type: "snapshot", payload: { tick: 1 } }) });
    expect(statuses).toEqual(["connecting", "open"]);
    expect(messages).toEqual([{ type: "snapshot", payload: { tick: 1 } }]);
    client.close();
    expect(sockets[0].closedByClient).toBe(true);
  });

  it("reconnects with exponential backoff and gives up at the cap", () => {
    vi.useFakeTimers();
    try {
      const sockets: FakeSocket[] = [];
      const statuses: string[] = [];
      const client = new StreamClient(
        "ws://svc/stream",
        { onMessage: () => undefined, onStatus: (s) => statuses.push(s) },
        () => {
          const socket = new FakeSocket();
          sockets.push(socket);
          return socket;
        },
        3,
        100,
      );
      client.connect();
      sockets[0].onclose?.();
      expect(sockets).toHaveLength(1);
      vi.advanceTimersByTime(100); // first retry after base delay
      expect(sockets).toHaveLength(2);
      sockets[1].onclose?.();
      vi.advanceTimersByTime(150);
      expect(sockets).toHaveLength(2); // backoff doubled: not yet
      vi.advanceTimersByTime(50);
      expect(sockets).toHaveLength(3);
      sockets[2].onclose?.();
      vi.runAllTimers();
      expect(sockets).toHaveLength(3); // cap reached
      expect(statuses.at(-1)).toBe("down");
    } finally {
      vi.useRealTimers();
    }
  });

  it("does not reconnect after an explicit close", () => {
    vi.useFakeTimers();
    try {
      const sockets: FakeSocket[] = [];
      const client = new StreamClient(
        "ws://svc/stream",
        { onMessage: () => undefined, onStatus: () => undefined },
        () => {
          const socket = new FakeSocket();
          sockets.push(socket);
          return socket;
        },
      );
      client.connect();
      client.close();
      sockets[0].onclose?.();
      vi.runAllTimers();
      expect(sockets).toHaveLength(1);
    } finally {
      vi.useRealTimers();
    }
  });
});
