import { describe, expect, it } from "vitest";

import { AGENT_SIZE, agentTriangle, DrawingContext, renderWorld } from "../src/canvas";
import { WorldSnapshot } from "../src/types";

class RecordingContext implements DrawingContext {
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 0;
  calls: string[] = [];
  fills: string[] = [];
  strokes: string[] = [];

  clearRect(): void {
    this.calls.push("clearRect");
  }
  beginPath(): void {
    this.calls.push("beginPath");
  }
  moveTo(): void {
    this.calls.push("moveTo");
  }
  lineTo(): void {
    this.calls.push("lineTo");
  }
  arc(): void {
    this.calls.push("arc");
  }
  closePath(): void {
    this.calls.push("closePath");
  }
  fill(): void {
    this.calls.push("fill");
    this.fills.push(this.fillStyle);
  }
  stroke(): void {
    this.calls.push("stroke");
    this.strokes.push(this.strokeStyle);
  }
}

function world(overrides: Partial<WorldSnapshot> = {}): WorldSnapshot {
  return {
    tick: 0,
    width: 500,
    height: 500,
    agents: [],
    obstacles: [],
    targets: [],
    ...overrides,
  };
}

describe("agentTriangle", () => {
  it("points the nose along the heading", () => {
    const [nose] = agentTriangle({
      id: 0, x: 10, y: 20, heading: 0, color: "white", frozen: false,
    });
    expect(nose.x).toBeCloseTo(10 + AGENT_SIZE);
    expect(nose.y).toBeCloseTo(20);
  });

  it("rotates with the agent", () => {
    const up = agentTriangle({
      id: 0, x: 0, y: 0, heading: Math.PI / 2, color: "white", frozen: false,
    });
    expect(up[0].x).toBeCloseTo(0);
    expect(up[0].y).toBeCloseTo(AGENT_SIZE);
  });

  it("tail corners are symmetric about the heading axis", () => {
    const [, left, right] = agentTriangle({
      id: 0, x: 0, y: 0, heading: 0, color: "white", frozen: false,
    });
    expect(left.x).toBeCloseTo(right.x);
    expect(left.y).toBeCloseTo(-right.y);
  });
});

describe("renderWorld", () => {
  it("clears first, then draws every shape", () => {
    const ctx = new RecordingContext();
    renderWorld(ctx, world({
      agents: [{ id: 0, x: 1, y: 1, heading: 0, color: "green", frozen: false }],
      obstacles: [{ x: 250, y: 250, r: 30 }],
      targets: [{ x: 400, y: 250, r: 25 }],
    }));
    expect(ctx.calls[0]).toBe("clearRect");
    expect(ctx.calls.filter((c) => c === "arc")).toHaveLength(2);
    expect(ctx.calls.filter((c) => c === "fill")).toHaveLength(1);
  });

  it("paints agents in their reported color", () => {
    const ctx = new RecordingContext();
    renderWorld(ctx, world({
      agents: [
        { id: 0, x: 1, y: 1, heading: 0, color: "green", frozen: false },
        { id: 1, x: 2, y: 2, heading: 0, color: "red", frozen: false },
      ],
    }));
    expect(ctx.fills).toEqual(["green", "red"]);
  });

  it("outlines frozen agents", () => {
    const ctx = new RecordingContext();
    renderWorld(ctx, world({
      agents: [{ id: 0, x: 1, y: 1, heading: 0, color: "white", frozen: true }],
    }));
    expect(ctx.strokes).toContain("#d32f2f");
  });
});
