/**
 * Browser bootstrap: wires the gateway client, state, and render
 * functions to the page. All behavior lives in api/state/view; this file
 * only moves strings into the DOM and DOM events back out.
 */

import { GatewayClient } from "./api.js";
import {
  applyEvent,
  clearPrompt,
  type ConsoleState,
  hasPrompt,
  initialState,
  setBanner,
  setConnected,
  setTrace,
} from "./state.js";
import { renderBanner, renderPrompts, renderTimeline, renderTrace } from "./view.js";

let state: ConsoleState = initialState();
let client: GatewayClient | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function render() {
  el("banner").innerHTML = renderBanner(state);
  el("timeline").innerHTML = renderTimeline(state);
  el("prompts").innerHTML = renderPrompts(state);
  el("trace").innerHTML = renderTrace(state);
  el("timeline").scrollTop = el("timeline").scrollHeight;
}

function update(next: ConsoleState) {
  state = next;
  render();
}

async function connect() {
  const base = el<HTMLInputElement>("gateway-url").value.replace(/\/$/, "");
  client = new GatewayClient(base);
  const attrsRaw = el<HTMLInputElement>("attrs").value.trim();
  let attrs: Record<string, string> = {};
  try {
    attrs = attrsRaw ? JSON.parse(attrsRaw) : {};
  } catch {
    update(setBanner(state, "attributes must be JSON, e.g. {\"division\": \"hr\"}"));
    return;
  }
  try {
    const sessionId = await client.createSession(attrs);
    update(setConnected(state, sessionId));
    client.streamEvents(
      sessionId,
      (event) => update(applyEvent(state, event)),
      (error) => update(setBanner(state, `connection lost: ${error.message}`)),
    );
  } catch (error) {
    update(setBanner(state, `could not reach the gateway: ${String(error)}`));
  }
}

async function sendChat() {
  if (!client || !state.sessionId) return;
  const input = el<HTMLInputElement>("chat-input");
  const text = input.value.trim();
  if (!text) return;
  input.value = "";
  try {
    await client.postMessage(state.sessionId, text);
  } catch (error) {
    update(setBanner(state, `send failed: ${String(error)}`));
  }
}

async function answerIntegration(requestId: string, text: string) {
  // guard: never send a reply the gateway is not waiting for
  if (!client || !state.sessionId || !hasPrompt(state, requestId)) return;
  try {
    await client.postIntegration(state.sessionId, requestId, text);
    update(clearPrompt(state, requestId));
  } catch (error) {
    update(setBanner(state, `reply failed: ${String(error)}`));
  }
}

async function viewTrace(requestId: string) {
  if (!client || !state.sessionId) return;
  try {
    const trace = await client.getTrace(state.sessionId, requestId);
    const boardEntry = state.timeline.find(
      (e) => e.requestId === requestId && e.agoraId,
    );
    let agoraEntries: { author: string; stage: number; round: number; content: string }[] = [];
    if (boardEntry?.agoraId) {
      agoraEntries = (await client.getAgora(state.sessionId, boardEntry.agoraId)).entries;
    }
    update(setTrace(state, trace, agoraEntries));
  } catch (error) {
    update(setBanner(state, `trace unavailable: ${String(error)}`));
  }
}

export function start() {
  el("connect").addEventListener("click", connect);
  el("send").addEventListener("click", sendChat);
  el<HTMLInputElement>("chat-input").addEventListener("keydown", (event) => {
    if (event.key === "Enter") void sendChat();
  });
  el("prompts").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (!target.classList.contains("prompt-send")) return;
    const requestId = target.dataset.request ?? "";
    const input = document.querySelector<HTMLInputElement>(
      `.prompt-input[data-request="${requestId}"]`,
    );
    if (input) void answerIntegration(requestId, input.value);
  });
  el("timeline").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("trace-link")) {
      void viewTrace(target.dataset.request ?? "");
    }
  });
  render();
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
