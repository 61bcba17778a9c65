// Wire types for the session protocol. The server is the single source of
// truth for execution; the UI only mirrors what it is told.

export type NodeKind =
  | "root"
  | "sequence"
  | "selector"
  | "parallel"
  | "retry"
  | "repeat"
  | "invert"
  | "recovery"
  | "action"
  | "condition"
  | "select";

export interface TreeNode {
  id: string;
  kind: NodeKind;
  label: string;
  params: Record<string, unknown>;
  children: TreeNode[];
}

export interface TreeResponse {
  name: string;
  dsl: string;
  dot: string;
  tree: TreeNode;
}

export interface DeltaEntry {
  key: string;
  old: unknown;
  new: unknown;
}

export interface TraceEvent {
  tick: number;
  node: string;
  phase: "enter" | "exit" | "halted";
  status?: "success" | "failure" | "running";
  delta?: DeltaEntry[];
}

export interface Prompt {
  leaf: string;
  kind: "action" | "condition" | "select";
  label: string;
  options?: string[];
}

export interface Answer {
  leaf: string;
  status?: "success" | "failure";
  option?: number;
}

export interface CreateResponse {
  session_id: string;
  prompt?: Prompt;
  final_status?: string;
}

export interface StepResponse {
  events: TraceEvent[];
  prompt?: Prompt;
  final_status?: string;
}

export interface SessionState {
  session_id: string;
  finished: boolean;
  ticks: number;
  events: TraceEvent[];
  blackboard: Record<string, unknown>;
  prompt?: Prompt;
  final_status?: string;
}
