/** Console view state and its reducer.
 *
 * The view is a pure function of the event log: replaying the same events
 * always reproduces the same state, which is what the tests exercise.
 */

import { StreamMessage, WorldSnapshot } from "./types";

export const STAGE_ORDER = [
  "translation",
  "safety",
  "prompt",
  "raw_output",
  "validation",
  "execution",
] as const;

export type StageName = (typeof STAGE_ORDER)[number];

export type CardTone = "pending" | "ok" | "rejected" | "error";

export interface StageCard {
  stage: StageName;
  tone: CardTone;
  /** Human-readable body: normalized text, verdict reason, XML, status... */
  body: string;
}

export type ConnectionStatus = "connecting" | "open" | "reconnecting" | "down";

export interface ViewState {
  sessionId: string | null;
  scenarioId: number | null;
  connection: ConnectionStatus;
  /** Banner shown when the backend reports an external endpoint down (503). */
  banner: string | null;
  commandPending: boolean;
  cards: StageCard[];
  snapshot: WorldSnapshot | null;
  stopped: boolean;
}

export const initialState: ViewState = {
  sessionId: null,
  scenarioId: null,
  connection: "connecting",
  banner: null,
  commandPending: false,
  cards: [],
  snapshot: null,
  stopped: false,
};

export type ConsoleEvent =
  | { kind: "session_created"; sessionId: string; scenarioId: number }
  | { kind: "connection"; status: ConnectionStatus }
  | { kind: "command_submitted"; text: string }
  | { kind: "command_failed"; status: number; message: string }
  | { kind: "stop_confirmed" }
  | { kind: "stream"; message: StreamMessage };

function stageCard(
  stage: string,
  payload: Record<string, unknown>,
): StageCard | null {
  switch (stage) {
    case "translation":
      return {
        stage,
        tone: "ok",
        body: String(payload["normalized_text"] ?? ""),
      };
    case "safety": {
      const rejected = payload["decision"] === "Reject";
      return {
        stage,
        tone: rejected ? "rejected" : "ok",
        body: rejected ? String(payload["reason"] ?? "") : "allowed",
      };
    }
    case "prompt":
      return { stage, tone: "ok", body: `${payload["shots"] ?? 0}-shot prompt` };
    case "raw_output":
      return {
        stage,
        tone: "ok",
        body: String(payload["raw_model_output"] ?? ""),
      };
    case "validation": {
      const accepted = payload["verdict"] === "Accepted";
      const diagnostics = (payload["diagnostics"] as
        | { location: string; message: string }[]
        | undefined) ?? [];
      return {
        stage,
        tone: accepted ? "ok" : "rejected",
        body: accepted
          ? String(payload["xml"] ?? "")
          : `${payload["category"]}: ${diagnostics
              .map((d) => `${d.location}: ${d.message}`)
              .join("; ")}`,
      };
    }
    case "execution":
      return {
        stage,
        tone: "ok",
        body: String(payload["execution_status"] ?? ""),
      };
    case "error":
      return {
        stage: "execution",
        tone: "error",
        body: `${payload["stage"]}: ${payload["message"]}`,
      };
    default:
      return null;
  }
}

function upsertCard(cards: StageCard[], card: StageCard): StageCard[] {
  const existing = cards.findIndex((c) => c.stage === card.stage);
  const next = existing >= 0
    ? cards.map((c, i) => (i === existing ? card : c))
    : [...cards, card];
  // Invariant: cards always render in pipeline order.
  return next
    .slice()
    .sort((a, b) => STAGE_ORDER.indexOf(a.stage) - STAGE_ORDER.indexOf(b.stage));
}

export function reduce(state: ViewState, event: ConsoleEvent): ViewState {
  switch (event.kind) {
    case "session_created":
      return {
        ...initialState,
        sessionId: event.sessionId,
        scenarioId: event.scenarioId,
        connection: state.connection,
      };
    case "connection":
      return {
        ...state,
        connection: event.status,
        banner: event.status === "open" ? null : state.banner,
      };
    case "command_submitted":
      return {
        ...state,
        commandPending: true,
        cards: [],
        banner: null,
        stopped: false,
      };
    case "command_failed":
      return {
        ...state,
        commandPending: false,
        banner:
          event.status === 503
            ? `service unavailable: ${event.message}`
            : `command failed (${event.status}): ${event.message}`,
      };
    case "stop_confirmed":
      return {
        ...state,
        stopped: true,
        snapshot: state.snapshot && {
          ...state.snapshot,
          agents: state.snapshot.agents.map((a) => ({ ...a, frozen: true })),
        },
      };
    case "stream": {
      const message = event.message;
      if (message.type === "snapshot") {
        // A stopped console freezes the canvas: ignore stale motion frames.
        if (state.stopped) return state;
        return { ...state, snapshot: message.payload };
      }
      const card = stageCard(message.stage, message.payload);
      if (card === null) return state;
      if (card.stage === "validation" && card.tone === "ok" && !card.body) {
        // The accepted card displays the tree XML, which arrived on the
        // raw-output stage event.
        const raw = state.cards.find((c) => c.stage === "raw_output");
        if (raw) card.body = raw.body;
      }
      return {
        ...state,
        commandPending: false,
        cards: upsertCard(state.cards, card),
      };
    }
  }
}

/** Replay an event log from scratch; used to check the purity invariant. */
export function replay(events: ConsoleEvent[]): ViewState {
  return events.reduce(reduce, initialState);
}
