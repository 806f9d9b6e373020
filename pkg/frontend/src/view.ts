/**
 * Pure render functions: state in, HTML string out. Keeping them
 * DOM-free makes the whole rendering path testable headless.
 */

import type { ConsoleState, TimelineEntry } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const KIND_LABEL: Record<string, string> = {
  user: "you",
  answer: "assistant",
  notice: "notice",
  failure: "failed",
  publish: "published",
};

function entryHtml(entry: TimelineEntry): string {
  const label = KIND_LABEL[entry.kind] ?? entry.kind;
  const citations = entry.citations.length
    ? `<span class="citations">cites: ${entry.citations.map(escapeHtml).join(", ")}</span>`
    : "";
  const agora = entry.agoraId
    ? `<button class="agora-link" data-agora="${escapeHtml(entry.agoraId)}">board ${escapeHtml(entry.agoraId)}</button>`
    : "";
  return (
    `<div class="entry entry-${escapeHtml(entry.kind)}" data-request="${escapeHtml(entry.requestId)}">` +
    `<span class="label">${label}</span>` +
    `<span class="text">${escapeHtml(entry.text).replace(/\n/g, "<br>")}</span>` +
    `${citations}${agora}` +
    `<button class="trace-link" data-request="${escapeHtml(entry.requestId)}">trace</button>` +
    `</div>`
  );
}

export function renderTimeline(state: ConsoleState): string {
  return state.timeline.map(entryHtml).join("");
}

export function renderPrompts(state: ConsoleState): string {
  return state.prompts
    .map(
      (prompt) =>
        `<div class="prompt" data-request="${escapeHtml(prompt.requestId)}">` +
        `<span class="prompt-text">${escapeHtml(prompt.text)}</span>` +
        `<input class="prompt-input" data-request="${escapeHtml(prompt.requestId)}" ` +
        `placeholder="add the missing details">` +
        `<button class="prompt-send" data-request="${escapeHtml(prompt.requestId)}">send</button>` +
        `</div>`,
    )
    .join("");
}

export function renderTrace(state: ConsoleState): string {
  if (!state.trace) {
    return "<em>select an entry to inspect its trace</em>";
  }
  const { requestId, agents, stages, agoraEntries } = state.trace;
  const stageLine = stages.length
    ? `<div class="stages">stages: ${stages.join(" → ")}</div>`
    : "";
  const boardLines = agoraEntries
    .map(
      (entry) =>
        `<li><code>${escapeHtml(entry.author)}</code> (stage ${entry.stage}, round ${entry.round}): ` +
        `${escapeHtml(entry.content)}</li>`,
    )
    .join("");
  return (
    `<div class="trace" data-request="${escapeHtml(requestId)}">` +
    `<div class="agents">agents involved: ${agents.map(escapeHtml).join(", ")}</div>` +
    stageLine +
    (boardLines ? `<ul class="board">${boardLines}</ul>` : "") +
    `</div>`
  );
}

export function renderBanner(state: ConsoleState): string {
  return state.banner
    ? `<div class="banner error">${escapeHtml(state.banner)}</div>`
    : "";
}
