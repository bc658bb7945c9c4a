/**
 * DOM glue for the example grid: renders session state, sends synthesis
 * requests, and keeps at most one request in flight (edits abort it).
 */

import { Client, ServiceError } from "./api.js";
import {
  SessionState,
  applyResponse,
  buildRequest,
  canSynthesize,
  exportSession,
  importSession,
  initialState,
  setInput,
  setOutput,
} from "./logic.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ??
  "http://127.0.0.1:8000";

const client = new Client(SERVICE_URL);
let state: SessionState = initialState();
let inflight: AbortController | null = null;
let busy = false;

const root = document.getElementById("app")!;

function update(next: SessionState): void {
  if (inflight) {
    inflight.abort();
    inflight = null;
    busy = false;
  }
  state = next;
  render();
}

async function synthesize(): Promise<void> {
  if (!canSynthesize(state) || busy) return;
  inflight?.abort();
  const controller = new AbortController();
  inflight = controller;
  busy = true;
  render();
  try {
    const response = await client.synthesize(buildRequest(state), controller.signal);
    if (inflight !== controller) return; // superseded by an edit
    state = applyResponse(state, response);
  } catch (err) {
    if (controller.signal.aborted) return;
    state = {
      ...state,
      message:
        err instanceof ServiceError
          ? `service error ${err.status}: ${err.message}`
          : `request failed: ${String(err)}`,
    };
  } finally {
    if (inflight === controller) {
      inflight = null;
      busy = false;
    }
    render();
  }
}

async function whatIf(): Promise<void> {
  const box = document.getElementById("scratch-input") as HTMLInputElement;
  const out = document.getElementById("scratch-output")!;
  if (!state.synthesis || state.synthesis.stale) return;
  try {
    const reply = await client.apply(state.synthesis.program, [box.value]);
    const [result] = reply.results;
    out.textContent = result.ok ? JSON.stringify(result.value) : "(no output)";
  } catch (err) {
    out.textContent =
      err instanceof ServiceError ? `error: ${err.message}` : String(err);
  }
}

function download(filename: string, text: string): void {
  const link = document.createElement("a");
  link.href = URL.createObjectURL(new Blob([text], { type: "text/plain" }));
  link.download = filename;
  link.click();
  URL.revokeObjectURL(link.href);
}

function render(): void {
  root.textContent = "";

  const table = document.createElement("table");
  table.className = "grid";
  const head = table.insertRow();
  for (const title of ["#", "Input", "Output"]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.appendChild(th);
  }
  state.rows.forEach((row, i) => {
    const tr = table.insertRow();
    tr.insertCell().textContent = String(i + 1);

    const inputCell = tr.insertCell();
    const inputBox = document.createElement("input");
    inputBox.value = row.input;
    inputBox.placeholder = "input string";
    inputBox.addEventListener("change", () => update(setInput(state, i, inputBox.value)));
    inputCell.appendChild(inputBox);

    const outputCell = tr.insertCell();
    const outputBox = document.createElement("input");
    outputBox.value = row.output;
    outputBox.placeholder = row.kind === "failed" ? "(no output)" : "output";
    outputBox.className = `cell-${row.kind}`;
    outputBox.title =
      row.kind === "generated"
        ? "generated by the synthesized program; edit to correct it"
        : row.kind === "failed"
          ? "the program produced no output for this input"
          : "";
    outputBox.addEventListener("change", () =>
      update(setOutput(state, i, outputBox.value)),
    );
    outputCell.appendChild(outputBox);
  });
  root.appendChild(table);

  const controls = document.createElement("div");
  controls.className = "controls";

  const method = document.createElement("select");
  for (const value of ["uniform", "neural", "neural-greedy"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    option.selected = state.method === value;
    method.appendChild(option);
  }
  method.addEventListener("change", () =>
    update({ ...state, method: method.value as SessionState["method"] }),
  );
  controls.appendChild(labelled("method", method));

  const samples = numberBox(state.samples, (v) => update({ ...state, samples: v }));
  controls.appendChild(labelled("samples", samples));
  const seed = numberBox(state.seed, (v) => update({ ...state, seed: v }));
  controls.appendChild(labelled("seed", seed));

  const go = document.createElement("button");
  go.textContent = busy ? "synthesizing…" : "Synthesize";
  go.disabled = !canSynthesize(state) || busy;
  go.addEventListener("click", () => void synthesize());
  controls.appendChild(go);

  const exportButton = document.createElement("button");
  exportButton.textContent = "Export session";
  exportButton.addEventListener("click", () => {
    const text = exportSession(state, `session-${Date.now()}`);
    if (text === null) {
      update({ ...state, message: "fill every input cell before exporting" });
    } else {
      download("session.tsv", text);
    }
  });
  controls.appendChild(exportButton);

  const importInput = document.createElement("input");
  importInput.type = "file";
  importInput.addEventListener("change", () => {
    const file = importInput.files?.[0];
    if (!file) return;
    void file.text().then((text) => update(importSession(text)));
  });
  controls.appendChild(labelled("import", importInput));

  root.appendChild(controls);

  if (state.message) {
    const err = document.createElement("div");
    err.className = "message";
    err.textContent = state.message;
    root.appendChild(err);
  }

  const panel = document.createElement("div");
  panel.className = "program-panel";
  if (state.synthesis) {
    const title = document.createElement("h3");
    title.textContent = state.synthesis.stale
      ? "Program (stale: examples changed)"
      : "Program";
    panel.appendChild(title);
    const code = document.createElement("pre");
    code.textContent = state.synthesis.program;
    panel.appendChild(code);
    const meta = document.createElement("p");
    meta.textContent =
      `found at draw ${state.synthesis.foundAt ?? "?"} ` +
      `of up to ${state.synthesis.samples} samples`;
    panel.appendChild(meta);

    const scratch = document.createElement("input");
    scratch.id = "scratch-input";
    scratch.placeholder = "try the program on any input";
    const run = document.createElement("button");
    run.textContent = "Apply";
    run.disabled = state.synthesis.stale;
    run.addEventListener("click", () => void whatIf());
    const result = document.createElement("span");
    result.id = "scratch-output";
    panel.append(scratch, run, result);
  } else {
    const hint = document.createElement("p");
    hint.textContent =
      "Type a few example outputs, then synthesize to fill the rest.";
    panel.appendChild(hint);
  }
  root.appendChild(panel);
}

function labelled(text: string, el: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.textContent = `${text} `;
  label.appendChild(el);
  return label;
}

function numberBox(value: number, onChange: (v: number) => void): HTMLInputElement {
  const box = document.createElement("input");
  box.type = "number";
  box.value = String(value);
  box.addEventListener("change", () => onChange(parseInt(box.value || "0", 10)));
  return box;
}

render();
