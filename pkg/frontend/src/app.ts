// Session flow: pick a dataset, answer A/B questions, read the verdict.
// The active session id lives in sessionStorage so a reload resynchronizes
// from the poll endpoint instead of losing state.

import { ApiError, SessionClient, type DatasetInfo, type SessionView } from "./api.js";
import { renderError, renderQuestion, renderVerdict } from "./render.js";

const client = new SessionClient("");
const STORAGE_KEY = "winnow-session";

interface AppState {
  datasets: DatasetInfo[];
  sessionId: string | null;
  emphasized: Set<string>;
  busy: boolean;
}

const state: AppState = {
  datasets: [],
  sessionId: sessionStorage.getItem(STORAGE_KEY),
  emphasized: new Set(),
  busy: false,
};

function root(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

function show(el: HTMLElement): void {
  const r = root();
  r.replaceChildren(el);
}

function emphasizedFor(datasetId: string): Set<string> {
  const ds = state.datasets.find((d) => d.id === datasetId);
  if (!ds) return new Set();
  return new Set(ds.columns.filter((c) => c.emphasized).map((c) => c.name));
}

function showDatasetPicker(): void {
  const wrap = document.createElement("div");
  wrap.className = "picker";
  const heading = document.createElement("h2");
  heading.textContent = "pick a dataset to review";
  wrap.appendChild(heading);
  for (const ds of state.datasets) {
    const button = document.createElement("button");
    button.className = "dataset";
    button.textContent = `${ds.id}: ${ds.rows} rows, ≤ ${ds.budget} questions`;
    button.addEventListener("click", () => startSession(ds.id));
    wrap.appendChild(button);
  }
  show(wrap);
}

function showView(view: SessionView): void {
  if (view.status === "finished") {
    sessionStorage.removeItem(STORAGE_KEY);
    const verdict = renderVerdict(view, state.emphasized);
    const again = document.createElement("button");
    again.textContent = "review another";
    again.addEventListener("click", () => {
      state.sessionId = null;
      showDatasetPicker();
    });
    verdict.appendChild(again);
    show(verdict);
    return;
  }
  if (!view.question) return;
  show(renderQuestion(view.question, state.emphasized, (choice) => submit(choice)));
}

async function submit(choice: "A" | "B"): Promise<void> {
  if (!state.sessionId || state.busy) return;
  state.busy = true;
  try {
    const view = await client.answer(state.sessionId, choice);
    showView(view);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      await resync(); // answered after finish: recover silently from the poll
    } else {
      show(renderError(String(err), () => void resync()));
    }
  } finally {
    state.busy = false;
  }
}

async function resync(): Promise<void> {
  if (!state.sessionId) {
    showDatasetPicker();
    return;
  }
  try {
    const view = await client.poll(state.sessionId);
    showView(view);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      sessionStorage.removeItem(STORAGE_KEY);
      state.sessionId = null;
      showDatasetPicker();
      return;
    }
    show(renderError(String(err), () => void resync()));
  }
}

async function startSession(datasetId: string): Promise<void> {
  try {
    const created = await client.createSession(datasetId);
    state.sessionId = created.session_id;
    state.emphasized = emphasizedFor(datasetId);
    sessionStorage.setItem(STORAGE_KEY, created.session_id);
    await resync();
  } catch (err) {
    show(renderError(String(err), () => void startSession(datasetId)));
  }
}

async function boot(): Promise<void> {
  try {
    const listing = await client.listDatasets();
    state.datasets = listing.datasets;
  } catch (err) {
    show(renderError(String(err), () => void boot()));
    return;
  }
  if (state.sessionId) {
    // mid-session reload: restore from the idempotent poll
    const current = state.sessionId;
    const ds = state.datasets[0];
    state.emphasized = ds ? emphasizedFor(ds.id) : new Set();
    state.sessionId = current;
    await resync();
  } else {
    showDatasetPicker();
  }
}

document.addEventListener("DOMContentLoaded", () => void boot());
