import type {
  Answer,
  CreateResponse,
  SessionState,
  StepResponse,
  TreeResponse,
} from "./types.js";

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = await response.json();
  if (!response.ok) {
    throw new Error(body?.error ?? `${response.status} on ${url}`);
  }
  return body as T;
}

function post(payload: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  };
}

export class ApiClient {
  constructor(private readonly base = "") {}

  tree(): Promise<TreeResponse> {
    return request(`${this.base}/tree`);
  }

  createSession(body: { tree?: string; blackboard?: Record<string, unknown> } = {}):
      Promise<CreateResponse> {
    return request(`${this.base}/sessions`, post(body));
  }

  step(sessionId: string, answer?: Answer): Promise<StepResponse> {
    return request(`${this.base}/sessions/${sessionId}/step`,
                   post(answer ? { answer } : {}));
  }

  session(sessionId: string): Promise<SessionState> {
    return request(`${this.base}/sessions/${sessionId}`);
  }
}
