/**
 * Console state and the reducer that applies stream events to it.
 *
 * The timeline is strictly ordered by arrival. A pending integration
 * prompt never blocks other requests; it just sits in `prompts` until
 * answered or until its request reaches a terminal event.
 */

import type { StreamEvent, TraceResponse } from "./api.js";

export type TimelineEntry = {
  kind: string;
  requestId: string;
  text: string;
  citations: string[];
  code?: string;
  agoraId?: string;
};

export type PendingPrompt = { requestId: string; text: string };

export type TraceView = {
  requestId: string;
  agents: string[];
  stages: number[];
  agoraEntries: { author: string; stage: number; round: number; content: string }[];
};

export interface ConsoleState {
  sessionId: string | null;
  connected: boolean;
  banner: string | null;
  timeline: TimelineEntry[];
  prompts: PendingPrompt[];
  trace: TraceView | null;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    connected: false,
    banner: null,
    timeline: [],
    prompts: [],
    trace: null,
  };
}

const TERMINAL = new Set(["answer", "publish", "failure"]);

export function applyEvent(state: ConsoleState, event: StreamEvent): ConsoleState {
  const payload = event.payload ?? {};
  const next: ConsoleState = { ...state, timeline: [...state.timeline] };

  if (event.type === "prompt") {
    next.prompts = [
      ...state.prompts,
      { requestId: event.request_id, text: String(payload.text ?? "") },
    ];
    return next;
  }

  next.timeline.push({
    kind: event.type,
    requestId: event.request_id,
    text: String(payload.text ?? ""),
    citations: Array.isArray(payload.citations)
      ? payload.citations.map(String)
      : [],
    code: typeof payload.code === "string" ? payload.code : undefined,
    agoraId: typeof payload.agora_id === "string" ? payload.agora_id : undefined,
  });
  if (TERMINAL.has(event.type)) {
    next.prompts = state.prompts.filter((p) => p.requestId !== event.request_id);
  } else {
    next.prompts = state.prompts;
  }
  return next;
}

export function hasPrompt(state: ConsoleState, requestId: string): boolean {
  return state.prompts.some((p) => p.requestId === requestId);
}

/** Remove a prompt once the gateway acknowledged the reply. */
export function clearPrompt(state: ConsoleState, requestId: string): ConsoleState {
  return {
    ...state,
    prompts: state.prompts.filter((p) => p.requestId !== requestId),
  };
}

export function setConnected(state: ConsoleState, sessionId: string): ConsoleState {
  return { ...state, sessionId, connected: true, banner: null };
}

export function setBanner(state: ConsoleState, message: string): ConsoleState {
  return { ...state, connected: false, banner: message };
}

export function setTrace(
  state: ConsoleState,
  trace: TraceResponse,
  agoraEntries: TraceView["agoraEntries"] = [],
): ConsoleState {
  const stages = trace.records
    .filter((r) => r.action === "StageEntered")
    .map((r) => Number(r.detail));
  return {
    ...state,
    trace: {
      requestId: trace.request_id,
      agents: trace.agents_involved,
      stages,
      agoraEntries,
    },
  };
}

export function terminalFor(
  state: ConsoleState,
  requestId: string,
): TimelineEntry | undefined {
  return [...state.timeline]
    .reverse()
    .find((e) => e.requestId === requestId && TERMINAL.has(e.kind));
}
