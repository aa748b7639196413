/** Wire types for the swarm-command API service. */

export interface AgentSnapshot {
  id: number;
  x: number;
  y: number;
  heading: number;
  color: string;
  frozen: boolean;
}

export interface CircleSnapshot {
  x: number;
  y: number;
  r: number;
}

export interface WorldSnapshot {
  tick: number;
  width: number;
  height: number;
  agents: AgentSnapshot[];
  obstacles: CircleSnapshot[];
  targets: CircleSnapshot[];
}

export interface SafetyVerdict {
  decision: "Allow" | "Reject";
  reason: string;
  source: string;
}

export interface ValidationReport {
  verdict: "Accepted" | "Rejected";
  category: string | null;
  diagnostics: { location: string; message: string }[];
}

export interface PipelineTrace {
  trace_id: string;
  normalized_text: string | null;
  safety_verdict: SafetyVerdict | null;
  prompt_spec: { shots: number } | null;
  raw_model_output: string | null;
  validation_report: ValidationReport | null;
  execution_status: string;
  stage_error: { stage: string; message: string } | null;
}

/** Messages arriving on the /sessions/{id}/stream WebSocket. */
export type StreamMessage =
  | { type: "trace_stage"; stage: string; payload: Record<string, unknown> }
  | { type: "snapshot"; payload: WorldSnapshot };

export interface ScenarioInfo {
  id: number;
  description: string;
}
