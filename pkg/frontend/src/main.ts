/** Browser entry point: wires the store, stream client, and renderers to
 * the DOM. All state transitions live in the imported modules; this file
 * is glue only. */

import { ApiClient } from "./api.js";
import { chartPoints, decodePpm, parseSeriesCsv, previewKind } from "./filePreview.js";
import { submitResume } from "./resumeForm.js";
import {
  renderFilePanel,
  renderMessages,
  renderStepFeed,
  SessionStore,
} from "./sessionView.js";
import { EventStream } from "./stream.js";

const api = new ApiClient(window.location.origin);
let store: SessionStore | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function render(): void {
  if (!store) return;
  el("messages").innerHTML = renderMessages(store);
  el("steps").innerHTML = renderStepFeed(store);
  el("files").innerHTML = renderFilePanel(store);
  (el("composer-input") as HTMLInputElement).disabled = !store.composerEnabled;
  (el("composer-send") as HTMLButtonElement).disabled = !store.composerEnabled;
  el("run-error").textContent = store.error ?? "";
}

async function refreshFiles(): Promise<void> {
  if (!store) return;
  store.setFiles(await api.listFiles(store.sessionId));
  render();
}

async function runMessage(text: string): Promise<void> {
  if (!store || !store.composerEnabled) return;
  const active = store;
  active.sendUserMessage(text);
  render();
  const posted = await api.postMessage(active.sessionId, text);
  const stream = new EventStream(
    (cursor) => api.eventsUrl(active.sessionId, cursor),
    {
      onEvent: (event) => {
        active.applyEvent(event);
        render();
      },
      onStateChange: (state) => {
        active.setStreamState(state);
        render();
      },
    },
    posted.cursor,
  );
  await stream.run();
  await refreshFiles();
}

async function previewFile(fileId: string): Promise<void> {
  if (!store) return;
  const entry = store.files.find((f) => f.file_id === fileId);
  if (!entry) return;
  const target = el("preview");
  const kind = previewKind(entry);
  if (kind === "download") {
    target.innerHTML = `<p>${entry.file_id} is not previewable; use the download link.</p>`;
    return;
  }
  const { bytes } = await api.fetchFile(store.sessionId, fileId);
  if (kind === "image") {
    const image = decodePpm(bytes);
    const canvas = document.createElement("canvas");
    canvas.width = image.width;
    canvas.height = image.height;
    const ctx = canvas.getContext("2d");
    if (ctx) {
      const rgba = new Uint8ClampedArray(image.pixels);
      ctx.putImageData(new ImageData(rgba, image.width, image.height), 0, 0);
    }
    target.replaceChildren(canvas);
  } else {
    const series = parseSeriesCsv(new TextDecoder().decode(bytes));
    const points = chartPoints(series, 480, 240);
    target.innerHTML =
      `<svg viewBox="0 0 480 240" class="series-chart">` +
      `<polyline fill="none" stroke="currentColor" points="${points}"/></svg>` +
      `<p class="axis-labels">${series.labels.join(" vs ")}</p>`;
  }
}

async function start(): Promise<void> {
  const info = await api.createSession();
  store = new SessionStore(info.session_id, info.summary);
  render();

  el("composer-send").addEventListener("click", () => {
    const input = el("composer-input") as HTMLInputElement;
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    void runMessage(text);
  });

  el("resume-send").addEventListener("click", async () => {
    const input = el("resume-input") as HTMLInputElement;
    const result = await submitResume(api, input.value);
    if (!result.ok) {
      el("resume-error").textContent = result.error;
      return;
    }
    el("resume-error").textContent = "";
    store = result.store;
    render();
  });

  el("steps").addEventListener("click", (event) => {
    const card = (event.target as HTMLElement).closest("[data-step]");
    if (card && store) {
      store.toggleStep(Number(card.getAttribute("data-step")));
      render();
    }
  });

  el("files").addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest("[data-file]");
    if (row) void previewFile(row.getAttribute("data-file") ?? "");
  });
}

void start();
