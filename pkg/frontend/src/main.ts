/** Browser shell: tab routing, event wiring, and state. All rendering goes
 * through the pure functions in editor/whatif/scatter; all data through the
 * ApiClient. */

import { ApiClient, ApiError, ConflictError, OptimizeUnavailable } from "./api.js";
import {
  applyConflict,
  applySaveResponse,
  buildSavePayload,
  draftFromStored,
  emptyDraft,
  setMagnitude,
  setReceptorLimit,
  validateDraft,
  type ScenarioDraft,
} from "./draft.js";
import { renderEditor } from "./editor.js";
import type { HistoryEntry } from "./whatif.js";
import {
  describeCausal,
  describeOptimize,
  pushHistory,
  renderCausalPanel,
  renderFootprintPanel,
  renderHistory,
  renderOptimizePanel,
  renderOptimizeStatusPanel,
} from "./whatif.js";
import {
  outlierKeySet,
  parseScatterCsv,
  renderDivergenceList,
  renderScatterSvg,
} from "./scatter.js";
import type { MatrixSummary } from "./types.js";
import { escapeHtml, prob6 } from "./format.js";

const api = new ApiClient("");

interface AppState {
  summary: MatrixSummary;
  draft: ScenarioDraft;
  history: HistoryEntry[];
  doSet: Set<string>;
  activityProbs: Record<string, number>;
}

const state: AppState = {
  summary: { loaded: false },
  draft: emptyDraft(),
  history: [],
  doSet: new Set(),
  activityProbs: {},
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function setStatus(text: string, isError = false): void {
  const bar = el("status-bar");
  bar.textContent = text;
  bar.className = isError ? "error" : "";
}

// -- editor -------------------------------------------------------------

function redrawEditor(): void {
  const issues = validateDraft(state.draft, state.summary);
  el("editor-root").innerHTML = renderEditor(state.summary, state.draft, issues);
}

async function saveScenario(): Promise<void> {
  const issues = validateDraft(state.draft, state.summary);
  if (issues.length) {
    setStatus("fix validation issues before saving", true);
    return;
  }
  const id = state.draft.id ?? state.draft.name.replace(/[^A-Za-z0-9_.-]+/g, "-");
  const payload = buildSavePayload(state.draft);
  try {
    const stored =
      state.draft.version === null
        ? await api.createScenario(id, payload.scenario)
        : await api.putScenario(id, payload.scenario, payload.expected_version);
    state.draft = applySaveResponse(state.draft, stored);
    setStatus(`saved ${stored.id} v${stored.version}`);
  } catch (err) {
    if (err instanceof ConflictError) {
      state.draft = applyConflict(state.draft, err.currentVersion);
      setStatus("version conflict: reload or overwrite", true);
    } else if (err instanceof ApiError) {
      setStatus(err.validationDetails.map((d) => d.message).join("; "), true);
    } else {
      throw err;
    }
  }
  redrawEditor();
}

async function reloadScenario(): Promise<void> {
  if (!state.draft.id) return;
  state.draft = draftFromStored(await api.getScenario(state.draft.id));
  redrawEditor();
}

async function overwriteScenario(): Promise<void> {
  if (!state.draft.id) return;
  const payload = buildSavePayload(state.draft);
  const stored = await api.putScenario(state.draft.id, payload.scenario, null);
  state.draft = applySaveResponse(state.draft, stored);
  redrawEditor();
}

// -- what-if console ------------------------------------------------------

function remember(entry: HistoryEntry): void {
  state.history = pushHistory(state.history, entry);
  el("history-root").innerHTML = renderHistory(state.history);
}

async function runAssess(): Promise<void> {
  const fp = await api.assess(buildSavePayload(state.draft).scenario);
  el("footprint-root").innerHTML = renderFootprintPanel(fp);
  remember({
    at: new Date().toISOString(),
    kind: "assess",
    summary: `footprint of ${fp.scenario_name}`,
  });
}

function redrawCausalControls(): void {
  const activities = state.summary.activities ?? [];
  const toggles = activities
    .map((a) => {
      const on = state.doSet.has(a.id) ? " checked" : "";
      const prob = state.activityProbs[a.id];
      return (
        `<label class="do-toggle"><input type="checkbox" data-do="${escapeHtml(a.id)}"${on}>` +
        ` ${escapeHtml(a.name)}</label>` +
        `<input type="number" min="0" max="1" step="0.05" placeholder="P" ` +
        `data-actprob="${escapeHtml(a.id)}" value="${prob ?? ""}">`
      );
    })
    .join("<br>");
  const targets = [
    ...(state.summary.impacts ?? []).map((i) => ({ id: i.id, kind: "impact" })),
    ...(state.summary.receptors ?? []).map((r) => ({ id: r.id, kind: "receptor" })),
  ]
    .map((t) => `<option value="${escapeHtml(t.id)}">${escapeHtml(t.id)} (${t.kind})</option>`)
    .join("");
  el("causal-controls").innerHTML =
    `${toggles}<br><label>Target <select id="causal-target">${targets}</select></label> ` +
    `<button data-action="run-causal">Query</button>`;
}

async function runCausal(): Promise<void> {
  const target = (el("causal-target") as HTMLSelectElement).value;
  const result = await api.causalQuery(
    [...state.doSet],
    state.activityProbs,
    target,
  );
  el("causal-root").innerHTML = renderCausalPanel(result);
  remember({
    at: new Date().toISOString(),
    kind: "causal",
    summary: `${describeCausal(result)} with do={${[...state.doSet].join(",")}}`,
  });
}

async function runOptimize(): Promise<void> {
  const kind = (el("opt-kind") as HTMLSelectElement).value;
  const receptor = (el("opt-receptor") as HTMLSelectElement).value;
  const sense = (el("opt-sense") as HTMLSelectElement).value;
  const delta = Number((el("opt-delta") as HTMLInputElement).value || "0.01");
  const scenario = buildSavePayload(state.draft).scenario;
  const body: Record<string, unknown> =
    kind === "max_receptor"
      ? { kind, receptor, sense }
      : kind === "delta"
        ? { kind, scenario, receptor, sense, delta }
        : {
            kind,
            scenario,
            objective: { kind: "receptor", receptor, sense },
          };
  try {
    const result = await api.optimize(body);
    el("optimize-root").innerHTML = renderOptimizePanel(result);
    remember({
      at: new Date().toISOString(),
      kind: "optimize",
      summary: describeOptimize(result),
    });
  } catch (err) {
    if (err instanceof OptimizeUnavailable) {
      el("optimize-root").innerHTML = renderOptimizeStatusPanel(
        err.statusBody.status,
        err.statusBody.kind,
      );
      remember({
        at: new Date().toISOString(),
        kind: "optimize",
        summary: `${kind}: ${err.statusBody.status}`,
      });
    } else {
      throw err;
    }
  }
}

function redrawOptimizeControls(): void {
  const receptors = (state.summary.receptors ?? [])
    .map((r) => `<option value="${escapeHtml(r.id)}">${escapeHtml(r.name)}</option>`)
    .join("");
  el("optimize-controls").innerHTML =
    `<label>Kind <select id="opt-kind">` +
    `<option value="max_receptor">strongest activity</option>` +
    `<option value="capacity">capacity planning</option>` +
    `<option value="delta">bounded re-optimization</option></select></label> ` +
    `<label>Receptor <select id="opt-receptor">${receptors}</select></label> ` +
    `<label>Sense <select id="opt-sense"><option>max</option><option>min</option></select></label> ` +
    `<label>Delta <input id="opt-delta" type="number" step="0.01" value="0.01"></label> ` +
    `<button data-action="run-optimize">Optimize</button>`;
}

// -- comparison -----------------------------------------------------------

async function redrawComparison(): Promise<void> {
  try {
    const [csv, divergence] = await Promise.all([
      api.compareScatterCsv(),
      api.compareDivergence().catch(() => ({ entries: [] })),
    ]);
    const rows = parseScatterCsv(csv);
    if (!rows.length) {
      el("comparison-root").innerHTML =
        `<p class="placeholder">No comparison data: upload matrices first.</p>`;
      return;
    }
    const outliers = outlierKeySet(divergence.entries);
    el("comparison-root").innerHTML =
      renderScatterSvg(rows, outliers) + renderDivergenceList(divergence.entries);
  } catch (err) {
    el("comparison-root").innerHTML =
      `<p class="placeholder">Comparison unavailable.</p>`;
  }
}

// -- bootstrap --------------------------------------------------------------

function wireEvents(): void {
  document.body.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const row = target.closest(".divergence-row");
    if (row) {
      // click-through: highlight the contributing cell in the scatter
      const activity = row.getAttribute("data-activity");
      const receptor = row.getAttribute("data-receptor");
      for (const point of document.querySelectorAll(".scatter .point")) {
        point.classList.toggle(
          "selected",
          point.getAttribute("data-activity") === activity &&
            point.getAttribute("data-receptor") === receptor,
        );
      }
    }
    const action = target.getAttribute("data-action");
    if (!action) return;
    if (action === "save-scenario") void saveScenario();
    if (action === "reload-scenario") void reloadScenario();
    if (action === "overwrite-scenario") void overwriteScenario();
    if (action === "run-assess") void runAssess();
    if (action === "run-causal") void runCausal();
    if (action === "run-optimize") void runOptimize();
    if (action.startsWith("tab-")) {
      for (const section of document.querySelectorAll("main > section")) {
        section.classList.toggle("active", section.id === action.slice(4));
      }
      if (action === "tab-comparison") void redrawComparison();
    }
  });

  document.body.addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    const magnitudeId = target.getAttribute("data-magnitude");
    if (magnitudeId !== null) {
      state.draft = setMagnitude(state.draft, magnitudeId, Number(target.value));
      redrawEditor();
    }
    const limitId = target.getAttribute("data-limit");
    if (limitId !== null) {
      state.draft = setReceptorLimit(state.draft, limitId, Number(target.value));
      redrawEditor();
    }
    const doId = target.getAttribute("data-do");
    if (doId !== null) {
      if (target.checked) state.doSet.add(doId);
      else state.doSet.delete(doId);
    }
    const probId = target.getAttribute("data-actprob");
    if (probId !== null) {
      if (target.value === "") delete state.activityProbs[probId];
      else state.activityProbs[probId] = Number(target.value);
    }
    const field = target.getAttribute("data-field");
    if (field === "name") {
      state.draft = { ...state.draft, name: target.value };
    }
  });
}

async function bootstrap(): Promise<void> {
  wireEvents();
  state.summary = await api.matricesSummary();
  redrawEditor();
  redrawCausalControls();
  redrawOptimizeControls();
  el("history-root").innerHTML = renderHistory(state.history);
  setStatus(
    state.summary.loaded
      ? `matrices loaded: ${state.summary.nope} activities, ` +
          `${state.summary.npre} impacts, ${state.summary.nric} receptors`
      : "no matrices loaded",
  );
}

void bootstrap();
