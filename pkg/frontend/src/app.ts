/** Single-page operator console: DOM wiring around the pure reducer.
 *
 * One session per tab. Everything the user sees derives from ViewState;
 * DOM handlers only dispatch events and call the API client.
 */

import { ApiClient, ApiError, SocketLike, StreamClient } from "./api";
import { DrawingContext, renderWorld } from "./canvas";
import { ConsoleEvent, initialState, reduce, ViewState } from "./state";

const TONE_COLORS: Record<string, string> = {
  pending: "#9e9e9e",
  ok: "#2e7d32",
  rejected: "#d32f2f",
  error: "#e65100",
};

export function startConsole(root: HTMLElement, baseUrl: string): void {
  const api = new ApiClient(baseUrl);
  let state: ViewState = initialState;
  let stream: StreamClient | null = null;

  root.innerHTML = `
    <header>
      <select id="scenario"></select>
      <button id="connect">Connect</button>
      <span id="connection"></span>
    </header>
    <div id="banner" hidden></div>
    <main>
      <section>
        <input id="command" placeholder="Command the swarm..." />
        <button id="submit" disabled>Send</button>
        <button id="stop" disabled>Emergency stop</button>
        <div id="cards"></div>
      </section>
      <canvas id="world" width="500" height="500"></canvas>
    </main>
  `;

  const el = <T extends HTMLElement>(id: string): T =>
    root.querySelector(`#${id}`) as T;
  const canvas = el<HTMLCanvasElement>("world");
  const ctx = canvas.getContext("2d");

  function dispatch(event: ConsoleEvent): void {
    state = reduce(state, event);
    render();
  }

  function render(): void {
    el("connection").textContent = state.connection;
    const banner = el("banner");
    banner.hidden = state.banner === null;
    banner.textContent = state.banner ?? "";
    el<HTMLButtonElement>("submit").disabled =
      state.sessionId === null || state.commandPending;
    el<HTMLButtonElement>("stop").disabled = state.sessionId === null;

    const cards = el("cards");
    cards.innerHTML = "";
    for (const card of state.cards) {
      const div = document.createElement("div");
      div.className = `card card-${card.stage}`;
      div.style.borderLeft = `4px solid ${TONE_COLORS[card.tone]}`;
      const title = document.createElement("strong");
      title.textContent = card.stage;
      const body = document.createElement("pre");
      body.textContent = card.body;
      const copy = document.createElement("button");
      copy.textContent = "copy";
      copy.onclick = () => void navigator.clipboard.writeText(card.body);
      div.append(title, copy, body);
      cards.appendChild(div);
    }

    // CanvasRenderingContext2D is a structural superset of DrawingContext;
    // the renderer only ever writes string styles.
    if (ctx && state.snapshot) {
      renderWorld(ctx as unknown as DrawingContext, state.snapshot);
    }
  }

  async function loadScenarios(): Promise<void> {
    const select = el<HTMLSelectElement>("scenario");
    for (const scenario of await api.listScenarios()) {
      const option = document.createElement("option");
      option.value = String(scenario.id);
      option.textContent = `${scenario.id}: ${scenario.description}`;
      select.appendChild(option);
    }
  }

  el("connect").onclick = async () => {
    const scenarioId = Number(el<HTMLSelectElement>("scenario").value);
    const sessionId = await api.createSession(scenarioId);
    dispatch({ kind: "session_created", sessionId, scenarioId });
    stream?.close();
    const wsUrl =
      baseUrl.replace(/^http/, "ws") + `/sessions/${sessionId}/stream`;
    stream = new StreamClient(
      wsUrl,
      {
        onMessage: (message) => dispatch({ kind: "stream", message }),
        onStatus: (status) => dispatch({ kind: "connection", status }),
      },
      (url) => new WebSocket(url) as unknown as SocketLike,
    );
    stream.connect();
  };

  el("submit").onclick = async () => {
    if (state.sessionId === null) return;
    const text = el<HTMLInputElement>("command").value;
    dispatch({ kind: "command_submitted", text });
    try {
      await api.submitCommand(state.sessionId, text);
    } catch (error) {
      const status = error instanceof ApiError ? error.status : 0;
      dispatch({
        kind: "command_failed",
        status,
        message: error instanceof Error ? error.message : String(error),
      });
    }
  };

  el("stop").onclick = async () => {
    if (state.sessionId === null) return;
    await api.stop(state.sessionId);
    dispatch({ kind: "stop_confirmed" });
  };

  void loadScenarios();
  render();
}
