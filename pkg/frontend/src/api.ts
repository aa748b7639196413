/** HTTP and WebSocket clients for the swarm-command service.
 *
 * Transports are injectable so tests can run without a network or DOM.
 */

import { PipelineTrace, ScenarioInfo, StreamMessage } from "./types";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      const detail = payload?.["detail"];
      throw new ApiError(response.status, JSON.stringify(detail ?? payload));
    }
    return payload as T;
  }

  listScenarios(): Promise<ScenarioInfo[]> {
    return this.request("GET", "/scenarios");
  }

  async createSession(scenarioId: number, seed?: number): Promise<string> {
    const body = await this.request<{ session_id: string }>("POST", "/sessions", {
      scenario_id: scenarioId,
      ...(seed === undefined ? {} : { seed }),
    });
    return body.session_id;
  }

  submitCommand(
    sessionId: string,
    text: string,
    shots = 0,
    language?: string,
  ): Promise<PipelineTrace> {
    return this.request("POST", `/sessions/${sessionId}/command`, {
      text,
      shots,
      ...(language === undefined ? {} : { language }),
    });
  }

  stop(sessionId: string): Promise<{ status: string }> {
    return this.request("POST", `/sessions/${sessionId}/stop`);
  }
}

/** The subset of the WebSocket API the stream client uses. */
export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamCallbacks {
  onMessage(message: StreamMessage): void;
  onStatus(status: "connecting" | "open" | "reconnecting" | "down"): void;
}

/** One message queue from one WebSocket; reconnects with capped backoff. */
export class StreamClient {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly callbacks: StreamCallbacks,
    private readonly socketFactory: SocketFactory,
    private readonly maxAttempts = 5,
    private readonly baseDelayMs = 250,
  ) {}

  connect(): void {
    this.callbacks.onStatus(this.attempts === 0 ? "connecting" : "reconnecting");
    this.socket = this.socketFactory(this.url);
    this.socket.onopen = () => {
      this.attempts = 0;
      this.callbacks.onStatus("open");
    };
    this.socket.onmessage = (event) => {
      this.callbacks.onMessage(JSON.parse(event.data) as StreamMessage);
    };
    this.socket.onclose = () => {
      if (this.closed) return;
      this.attempts += 1;
      if (this.attempts >= this.maxAttempts) {
        this.callbacks.onStatus("down");
        return;
      }
      const delay = this.baseDelayMs * 2 ** (this.attempts - 1);
      this.timer = setTimeout(() => this.connect(), delay);
    };
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
  }
}
