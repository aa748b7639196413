/** Canvas geometry and drawing for the swarm view.
 *
 * Geometry is computed by pure functions so the renderer can be tested
 * against a recording context without a DOM.
 */

import { AgentSnapshot, CircleSnapshot, WorldSnapshot } from "./types";

export const AGENT_SIZE = 6;

export interface Point {
  x: number;
  y: number;
}

/** Oriented triangle: nose along the heading, two tail corners behind. */
export function agentTriangle(agent: AgentSnapshot, size = AGENT_SIZE): Point[] {
  const { x, y, heading } = agent;
  const nose = { x: x + size * Math.cos(heading), y: y + size * Math.sin(heading) };
  const back = 2.4; // tail corners sit 2.4 rad off the heading
  const left = {
    x: x + size * Math.cos(heading + back),
    y: y + size * Math.sin(heading + back),
  };
  const right = {
    x: x + size * Math.cos(heading - back),
    y: y + size * Math.sin(heading - back),
  };
  return [nose, left, right];
}

/** Minimal 2D-context surface the renderer needs; matches the DOM API. */
export interface DrawingContext {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, start: number, end: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
}

function drawCircle(ctx: DrawingContext, circle: CircleSnapshot, style: string) {
  ctx.strokeStyle = style;
  ctx.beginPath();
  ctx.arc(circle.x, circle.y, circle.r, 0, 2 * Math.PI);
  ctx.stroke();
}

export function renderWorld(ctx: DrawingContext, world: WorldSnapshot): void {
  ctx.clearRect(0, 0, world.width, world.height);
  for (const obstacle of world.obstacles) drawCircle(ctx, obstacle, "#888888");
  for (const target of world.targets) drawCircle(ctx, target, "#2e7d32");
  for (const agent of world.agents) {
    const [nose, left, right] = agentTriangle(agent);
    ctx.fillStyle = agent.color;
    ctx.beginPath();
    ctx.moveTo(nose.x, nose.y);
    ctx.lineTo(left.x, left.y);
    ctx.lineTo(right.x, right.y);
    ctx.closePath();
    ctx.fill();
    if (agent.frozen) {
      ctx.strokeStyle = "#d32f2f";
      ctx.lineWidth = 1;
      ctx.stroke();
    }
  }
}
