/**
 * HTTP client for the ideation server.
 *
 * Every response rides the same envelope: `{"status": "ok", "data": ...}`
 * on success, `{"status": "error", "error": {code, message, detail?}}` on
 * failure. `ApiError` carries the decoded error fields so callers can
 * branch on `code` instead of parsing messages.
 *
 * The generate endpoint streams server-sent events; `generate()` consumes
 * the stream incrementally, verifies the gap-free `sequence` numbering,
 * and resolves with the final batch summary.
 */

import type {
  AssignmentBody,
  Axis,
  ClientEvent,
  CorrectionResult,
  CreateSessionResult,
  EventsResult,
  FragmentResult,
  GenerateHandlers,
  GenerateOutcome,
  IdeaDraftView,
  NodeResult,
  NodeView,
  SelectDimensionsResult,
  SessionState,
  SteerMode,
  ToggleAxisResult,
  TreeView,
} from "./types.js";

export class ApiError extends Error {
  override name = "ApiError";

  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly detail: unknown = null,
  ) {
    super(message);
  }
}

/** Raised when the transport or envelope itself is malformed. */
export class ProtocolError extends Error {
  override name = "ProtocolError";
}

interface Envelope {
  status: "ok" | "error";
  data?: unknown;
  error?: { code: string; message: string; detail?: unknown };
}

function unwrap(status: number, body: unknown): unknown {
  const envelope = body as Envelope | null;
  if (envelope === null || typeof envelope !== "object" || !("status" in envelope)) {
    throw new ProtocolError(`response is not an envelope (HTTP ${status})`);
  }
  if (envelope.status === "ok") {
    return envelope.data;
  }
  const err = envelope.error;
  if (!err || typeof err.code !== "string") {
    throw new ProtocolError(`error envelope without error object (HTTP ${status})`);
  }
  throw new ApiError(status, err.code, err.message, err.detail ?? null);
}

/** Fresh idempotency token for a retryable mutation. */
export function newRequestToken(): string {
  return crypto.randomUUID();
}

interface SseFrame {
  event: string;
  data: Record<string, unknown>;
}

/** Parse one `event:`/`data:` block. Returns null for keep-alive noise. */
function parseSseBlock(block: string): SseFrame | null {
  let event = "";
  const dataLines: string[] = [];
  for (const line of block.split("\n")) {
    if (line.startsWith("event:")) {
      event = line.slice("event:".length).trim();
    } else if (line.startsWith("data:")) {
      dataLines.push(line.slice("data:".length).trimStart());
    }
  }
  if (!event && dataLines.length === 0) {
    return null;
  }
  const raw = dataLines.join("\n");
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new ProtocolError(`stream frame carries invalid JSON: ${raw.slice(0, 120)}`);
  }
  if (data === null || typeof data !== "object") {
    throw new ProtocolError("stream frame payload must be an object");
  }
  return { event, data: data as Record<string, unknown> };
}

/**
 * The mutation/query surface the UI layers depend on. `ApiClient` is the
 * real transport; tests substitute an in-memory fake.
 */
export interface SessionApi {
  createSession(intent: string): Promise<CreateSessionResult>;
  selectDimensions(
    sessionId: string,
    assignments: AssignmentBody[],
  ): Promise<SelectDimensionsResult>;
  toggleAxis(sessionId: string, axis: Axis, enabled: boolean): Promise<ToggleAxisResult>;
  generate(
    sessionId: string,
    handlers?: GenerateHandlers,
    relatedWorks?: string,
  ): Promise<GenerateOutcome>;
  steer(
    sessionId: string,
    nodeId: string,
    mode: SteerMode,
    targetScores: Record<string, number>,
    requestToken: string,
  ): Promise<NodeResult | CorrectionResult>;
  merge(
    sessionId: string,
    nodeA: string,
    nodeB: string,
    requestToken: string,
  ): Promise<NodeResult>;
  createFragment(
    sessionId: string,
    sourceIdeaId: string,
    text: string,
    requestToken?: string,
  ): Promise<FragmentResult>;
  applyFragment(
    sessionId: string,
    fragmentId: string,
    targetNodeId: string,
    requestToken: string,
  ): Promise<NodeResult>;
  postEvents(sessionId: string, events: ClientEvent[]): Promise<EventsResult>;
  state(sessionId: string): Promise<SessionState>;
  tree(sessionId: string): Promise<TreeView>;
}

export class ApiClient implements SessionApi {
  private readonly baseUrl: string;

  constructor(
    baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let parsed: unknown;
    try {
      parsed = await response.json();
    } catch {
      throw new ProtocolError(`non-JSON response (HTTP ${response.status})`);
    }
    return unwrap(response.status, parsed) as T;
  }

  createSession(intent: string): Promise<CreateSessionResult> {
    return this.request("POST", "/sessions", { intent });
  }

  selectDimensions(
    sessionId: string,
    assignments: AssignmentBody[],
  ): Promise<SelectDimensionsResult> {
    return this.request("POST", `/sessions/${sessionId}/dimensions`, { assignments });
  }

  toggleAxis(sessionId: string, axis: Axis, enabled: boolean): Promise<ToggleAxisResult> {
    return this.request("POST", `/sessions/${sessionId}/axes`, { axis, enabled });
  }

  async generate(
    sessionId: string,
    handlers: GenerateHandlers = {},
    relatedWorks?: string,
  ): Promise<GenerateOutcome> {
    const body =
      relatedWorks === undefined ? {} : { related_works: relatedWorks };
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/generate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const contentType = response.headers.get("content-type") ?? "";
    if (!contentType.includes("text/event-stream")) {
      // refused before streaming began (conflict, unknown session, ...)
      let parsed: unknown;
      try {
        parsed = await response.json();
      } catch {
        throw new ProtocolError(`non-stream, non-JSON response (HTTP ${response.status})`);
      }
      unwrap(response.status, parsed);
      throw new ProtocolError("generate answered ok without a stream");
    }
    if (response.body === null) {
      throw new ProtocolError("generate stream has no body");
    }

    const outcome: GenerateOutcome = {
      partial: false,
      node_ids: [],
      drafts: [],
      nodes: [],
      errors: [],
    };
    let expectedSequence = 0;
    let sawBatchDone = false;

    const handleFrame = (frame: SseFrame): void => {
      const sequence = frame.data["sequence"];
      if (sequence !== expectedSequence) {
        throw new ProtocolError(
          `stream sequence gap: expected ${expectedSequence}, got ${String(sequence)}`,
        );
      }
      expectedSequence += 1;
      switch (frame.event) {
        case "idea_draft": {
          const draft = frame.data["draft"] as IdeaDraftView;
          outcome.drafts.push(draft);
          handlers.onDraft?.(frame.data["index"] as number, draft);
          break;
        }
        case "idea_scored": {
          const node = frame.data["node"] as NodeView;
          outcome.nodes.push(node);
          handlers.onScored?.(node);
          break;
        }
        case "error": {
          const code = String(frame.data["code"]);
          const message = String(frame.data["message"]);
          outcome.errors.push({ code, message });
          handlers.onError?.(code, message);
          break;
        }
        case "batch_done": {
          outcome.partial = Boolean(frame.data["partial"]);
          outcome.node_ids = frame.data["node_ids"] as string[];
          sawBatchDone = true;
          break;
        }
        default:
          throw new ProtocolError(`unknown stream frame kind '${frame.event}'`);
      }
    };

    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      buffer += decoder.decode(value, { stream: true });
      let split: number;
      while ((split = buffer.indexOf("\n\n")) >= 0) {
        const block = buffer.slice(0, split);
        buffer = buffer.slice(split + 2);
        const frame = parseSseBlock(block);
        if (frame !== null) {
          handleFrame(frame);
        }
      }
    }
    const tail = parseSseBlock(buffer + decoder.decode());
    if (tail !== null) {
      handleFrame(tail);
    }
    if (!sawBatchDone) {
      throw new ProtocolError("generate stream ended without batch_done");
    }
    return outcome;
  }

  steer(
    sessionId: string,
    nodeId: string,
    mode: SteerMode,
    targetScores: Record<string, number>,
    requestToken: string,
  ): Promise<NodeResult | CorrectionResult> {
    return this.request("POST", `/sessions/${sessionId}/nodes/${nodeId}/steer`, {
      mode,
      target_scores: targetScores,
      request_token: requestToken,
    });
  }

  merge(
    sessionId: string,
    nodeA: string,
    nodeB: string,
    requestToken: string,
  ): Promise<NodeResult> {
    return this.request("POST", `/sessions/${sessionId}/merge`, {
      node_a: nodeA,
      node_b: nodeB,
      request_token: requestToken,
    });
  }

  createFragment(
    sessionId: string,
    sourceIdeaId: string,
    text: string,
    requestToken?: string,
  ): Promise<FragmentResult> {
    const body: Record<string, unknown> = { source_idea_id: sourceIdeaId, text };
    if (requestToken !== undefined) {
      body["request_token"] = requestToken;
    }
    return this.request("POST", `/sessions/${sessionId}/fragments`, body);
  }

  applyFragment(
    sessionId: string,
    fragmentId: string,
    targetNodeId: string,
    requestToken: string,
  ): Promise<NodeResult> {
    return this.request("POST", `/sessions/${sessionId}/fragments/${fragmentId}/apply`, {
      target_node_id: targetNodeId,
      request_token: requestToken,
    });
  }

  postEvents(sessionId: string, events: ClientEvent[]): Promise<EventsResult> {
    return this.request("POST", `/sessions/${sessionId}/events`, { events });
  }

  state(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}/state`);
  }

  tree(sessionId: string): Promise<TreeView> {
    return this.request("GET", `/sessions/${sessionId}/tree`);
  }
}
