/**
 * Pure session state for the example grid.
 *
 * Rows whose outputs the user typed (or accepted by correcting) are the
 * examples; rows with inputs but no user output are synthesis targets.
 * Generated cells are never carried across an edit: any change to inputs or
 * outputs clears every generated/failed cell and marks the last synthesis
 * stale, so the grid only ever shows predictions returned for the current
 * example set.
 */

export type CellKind = "empty" | "user" | "generated" | "failed";

export interface Row {
  input: string;
  output: string;
  kind: CellKind;
}

export type Method = "uniform" | "neural" | "neural-greedy";

export interface SynthesisInfo {
  program: string;
  samples: number;
  foundAt: number | null;
  stale: boolean;
}

export interface SessionState {
  rows: Row[];
  method: Method;
  samples: number;
  seed: number;
  synthesis: SynthesisInfo | null;
  message: string | null;
}

export interface ExampleBody {
  input: string;
  output: string;
}

export interface SynthesizeRequest {
  v: 1;
  examples: ExampleBody[];
  samples: number;
  method: Method;
  apply_to: string[];
  seed: number;
}

export interface Prediction {
  ok: boolean;
  value?: string;
}

export interface SynthesizeResponse {
  v: number;
  found: boolean;
  program?: string;
  consistent?: boolean;
  predictions: Prediction[];
  stats: { draws: number; found_at: number | null; timed_out: boolean };
}

export const GRID_ROWS = 5;

export function initialState(): SessionState {
  return {
    rows: Array.from({ length: GRID_ROWS }, () => ({
      input: "",
      output: "",
      kind: "empty" as CellKind,
    })),
    method: "uniform",
    samples: 100,
    seed: 0,
    synthesis: null,
    message: null,
  };
}

function cloneRows(rows: Row[]): Row[] {
  return rows.map((r) => ({ ...r }));
}

/** Drop every generated/failed cell and mark the last synthesis stale. */
function invalidateGenerated(state: SessionState): SessionState {
  const rows = state.rows.map((r) =>
    r.kind === "generated" || r.kind === "failed"
      ? { input: r.input, output: "", kind: "empty" as CellKind }
      : { ...r },
  );
  return {
    ...state,
    rows,
    synthesis: state.synthesis ? { ...state.synthesis, stale: true } : null,
    message: null,
  };
}

export function setInput(state: SessionState, index: number, value: string): SessionState {
  const next = invalidateGenerated(state);
  next.rows[index].input = value;
  if (value === "" && next.rows[index].kind === "user") {
    // an example row without an input is meaningless
    next.rows[index] = { input: "", output: "", kind: "empty" };
  }
  return next;
}

/** Typing into an output cell makes that row a user example. */
export function setOutput(state: SessionState, index: number, value: string): SessionState {
  const next = invalidateGenerated(state);
  next.rows[index].output = value;
  next.rows[index].kind = value === "" ? "empty" : "user";
  return next;
}

export function userExampleRows(state: SessionState): number[] {
  const out: number[] = [];
  state.rows.forEach((r, i) => {
    if (r.kind === "user" && r.input !== "") out.push(i);
  });
  return out;
}

export function applyTargetRows(state: SessionState): number[] {
  const out: number[] = [];
  state.rows.forEach((r, i) => {
    if (r.kind !== "user" && r.input !== "") out.push(i);
  });
  return out;
}

export function canSynthesize(state: SessionState): boolean {
  return userExampleRows(state).length >= 1;
}

export function buildRequest(state: SessionState): SynthesizeRequest {
  const examples = userExampleRows(state).map((i) => ({
    input: state.rows[i].input,
    output: state.rows[i].output,
  }));
  return {
    v: 1,
    examples,
    samples: state.samples,
    method: state.method,
    apply_to: applyTargetRows(state).map((i) => state.rows[i].input),
    seed: state.seed,
  };
}

export function applyResponse(
  state: SessionState,
  response: SynthesizeResponse,
): SessionState {
  const rows = cloneRows(state.rows);
  const targets = applyTargetRows(state);
  if (!response.found) {
    return {
      ...state,
      rows,
      synthesis: null,
      message: `no consistent program found (${response.stats.draws} draws` +
        `${response.stats.timed_out ? ", timed out" : ""})`,
    };
  }
  response.predictions.forEach((pred, j) => {
    const row = rows[targets[j]];
    if (row === undefined) return;
    if (pred.ok) {
      row.output = pred.value ?? "";
      row.kind = "generated";
    } else {
      row.output = "";
      row.kind = "failed";
    }
  });
  return {
    ...state,
    rows,
    synthesis: {
      program: response.program ?? "",
      samples: state.samples,
      foundAt: response.stats.found_at,
      stale: false,
    },
    message: response.consistent === false
      ? "warning: service reported the program inconsistent"
      : null,
  };
}

/** Correcting a generated cell turns it into an example for the next run. */
export function acceptCorrection(
  state: SessionState,
  index: number,
  value: string,
): SessionState {
  return setOutput(state, index, value);
}

// ---------------------------------------------------------------------------
// benchmark-format session export/import (tab-separated, escaped fields)

export function escapeField(s: string): string {
  return s
    .replace(/\\/g, "\\\\")
    .replace(/\t/g, "\\t")
    .replace(/\n/g, "\\n")
    .replace(/\r/g, "\\r");
}

export function unescapeField(s: string): string {
  let out = "";
  let i = 0;
  while (i < s.length) {
    const c = s[i];
    if (c === "\\" && i + 1 < s.length) {
      const next = s[i + 1];
      out += next === "t" ? "\t" : next === "n" ? "\n" : next === "r" ? "\r" : next;
      i += 2;
    } else {
      out += c;
      i += 1;
    }
  }
  return out;
}

/**
 * One benchmark record plus comment lines carrying the session settings.
 * Requires all five inputs to be filled; outputs may be empty. The reference
 * program is included only when the last synthesis is still current.
 */
export function exportSession(state: SessionState, id: string): string | null {
  if (state.rows.length !== GRID_ROWS) return null;
  if (state.rows.some((r) => r.input === "")) return null;
  const provided = userExampleRows(state).length;
  const fields: string[] = [id, String(provided)];
  for (const row of state.rows) {
    fields.push(row.input, row.output);
  }
  const program =
    state.synthesis && !state.synthesis.stale ? state.synthesis.program : "";
  fields.push(program);
  const kinds = state.rows.map((r) => r.kind).join(",");
  return [
    `# method=${state.method} samples=${state.samples} seed=${state.seed}`,
    `# kinds=${kinds}`,
    fields.map(escapeField).join("\t"),
  ].join("\n") + "\n";
}

export function importSession(text: string): SessionState {
  const state = initialState();
  let kinds: CellKind[] | null = null;
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trimEnd();
    if (line === "") continue;
    if (line.startsWith("#")) {
      const method = /method=(\S+)/.exec(line);
      if (method) state.method = method[1] as Method;
      const samples = /samples=(\d+)/.exec(line);
      if (samples) state.samples = parseInt(samples[1], 10);
      const seed = /seed=(\d+)/.exec(line);
      if (seed) state.seed = parseInt(seed[1], 10);
      const kindsMatch = /kinds=(\S+)/.exec(line);
      if (kindsMatch) kinds = kindsMatch[1].split(",") as CellKind[];
      continue;
    }
    const fields = line.split("\t").map(unescapeField);
    if (fields.length < 2 + 2 * GRID_ROWS) {
      throw new Error(`malformed session record: ${fields.length} fields`);
    }
    for (let i = 0; i < GRID_ROWS; i++) {
      const input = fields[2 + 2 * i];
      const output = fields[3 + 2 * i];
      const kind: CellKind = kinds
        ? kinds[i]
        : output === ""
          ? "empty"
          : "user";
      state.rows[i] = { input, output, kind };
    }
    const program = fields[2 + 2 * GRID_ROWS];
    if (program) {
      state.synthesis = {
        program,
        samples: state.samples,
        foundAt: null,
        stale: false,
      };
    }
  }
  return state;
}
