/** Session view model: messages, the live step feed, and the file panel.
 *
 * The store is pure state plus an applyEvent reducer; rendering is a
 * separate string-template pass so the model can be tested without a
 * browser. Displayed values all originate from service payloads.
 */

import { FileEntry } from "./api.js";
import { StreamEvent } from "./stream.js";

export interface Message {
  role: "user" | "agent" | "context";
  text: string;
}

export interface StepCard {
  index: number;
  thought: string;
  kind: string;
  toolName: string | null;
  toolInput: Record<string, unknown> | null;
  observation: string | null;
  answer: string | null;
  error: string | null;
  expanded: boolean;
}

export type RunStatus = "idle" | "running" | "reconnecting" | "done" | "error";

export class SessionStore {
  sessionId: string;
  messages: Message[] = [];
  steps: StepCard[] = [];
  files: FileEntry[] = [];
  status: RunStatus = "idle";
  runId: string | null = null;
  error: string | null = null;

  constructor(sessionId: string, openingSummary = "") {
    this.sessionId = sessionId;
    if (openingSummary) {
      this.messages.push({ role: "context", text: openingSummary });
    }
  }

  /** Composer availability mirrors the service's 409 contract. */
  get composerEnabled(): boolean {
    return this.status !== "running" && this.status !== "reconnecting";
  }

  sendUserMessage(text: string): void {
    this.messages.push({ role: "user", text });
    this.steps = [];
    this.status = "running";
  }

  setStreamState(state: string): void {
    if (state === "reconnecting") this.status = "reconnecting";
    else if (state === "open" && this.status === "reconnecting") {
      this.status = "running";
    }
  }

  setFiles(files: FileEntry[]): void {
    // Mirror the listing exactly; never invent or reorder entries.
    this.files = files;
  }

  toggleStep(index: number): void {
    const card = this.steps.find((s) => s.index === index);
    if (card) card.expanded = !card.expanded;
  }

  applyEvent(event: StreamEvent): void {
    if (event.type === "summary") {
      const text = String(event.data.text ?? "");
      if (!this.messages.some((m) => m.role === "context" && m.text === text)) {
        this.messages.unshift({ role: "context", text });
      }
      return;
    }
    if (event.type === "step") {
      const index = Number(event.data.index);
      if (this.steps.some((s) => s.index === index)) return;
      const step = event.data.step as Record<string, unknown>;
      this.steps.push({
        index,
        thought: String(step.thought ?? ""),
        kind: String(step.kind ?? ""),
        toolName: (step.tool_name as string | null) ?? null,
        toolInput: (step.tool_input as Record<string, unknown> | null) ?? null,
        observation: (step.observation as string | null) ?? null,
        answer: (step.answer as string | null) ?? null,
        error: (step.error as string | null) ?? null,
        expanded: false,
      });
      this.steps.sort((a, b) => a.index - b.index);
      return;
    }
    if (event.type === "final") {
      const outcome = String(event.data.outcome ?? "");
      const text = String(event.data.text ?? "");
      this.runId = (event.data.run_id as string | null) ?? null;
      if (outcome === "final_answer") {
        this.messages.push({ role: "agent", text });
        this.status = "done";
      } else {
        this.error = `${outcome}: ${text}`;
        this.status = "error";
      }
    }
  }
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/** Collapsed cards show the thought line only; expanding reveals the
 * action and its (possibly long) observation. */
export function renderStepCard(card: StepCard): string {
  const parts = [
    `<div class="step-card${card.expanded ? " expanded" : ""}" data-step="${card.index}">`,
    `<div class="step-thought">${escapeHtml(card.thought)}</div>`,
  ];
  if (card.expanded) {
    if (card.toolName !== null) {
      parts.push(
        `<div class="step-action">${escapeHtml(card.toolName)}(` +
          `${escapeHtml(JSON.stringify(card.toolInput ?? {}))})</div>`,
      );
    }
    if (card.observation !== null) {
      parts.push(`<pre class="step-observation">${escapeHtml(card.observation)}</pre>`);
    }
    if (card.answer !== null) {
      parts.push(`<div class="step-answer">${escapeHtml(card.answer)}</div>`);
    }
    if (card.error !== null) {
      parts.push(`<div class="step-error">${escapeHtml(card.error)}</div>`);
    }
  }
  parts.push("</div>");
  return parts.join("");
}

export function renderMessages(store: SessionStore): string {
  return store.messages
    .map((m) => `<div class="message ${m.role}">${escapeHtml(m.text)}</div>`)
    .join("");
}

export function renderStepFeed(store: SessionStore): string {
  const cards = store.steps.map(renderStepCard).join("");
  const note =
    store.status === "reconnecting"
      ? '<div class="stream-state">reconnecting…</div>'
      : "";
  return `<div class="step-feed">${cards}${note}</div>`;
}

export function renderFilePanel(store: SessionStore): string {
  const rows = store.files
    .map(
      (f) =>
        `<li class="file-entry${f.missing ? " missing" : ""}" data-file="${f.file_id}">` +
        `<span class="file-id">${escapeHtml(f.file_id)}</span> ` +
        `<span class="file-kind">${escapeHtml(f.kind)}</span> ` +
        `<span class="file-desc">${escapeHtml(f.description)}</span></li>`,
    )
    .join("");
  return `<ul class="file-panel">${rows}</ul>`;
}
