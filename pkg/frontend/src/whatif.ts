/** What-if console rendering: footprint panel, causal query panel,
 * optimization panel with dual-value sensitivity, and the session history.
 * Render functions display the service's numbers verbatim; nothing is
 * recomputed client-side. */

import type {
  CausalResponse,
  FootprintResponse,
  OptimizeResponse,
  SensitivityDoc,
} from "./types.js";
import { escapeHtml, num, prob6 } from "./format.js";

export interface HistoryEntry {
  at: string; // ISO timestamp
  kind: "assess" | "causal" | "optimize";
  summary: string;
}

export function pushHistory(
  history: HistoryEntry[],
  entry: HistoryEntry,
  cap = 50,
): HistoryEntry[] {
  return [entry, ...history].slice(0, cap);
}

export function describeCausal(result: CausalResponse): string {
  return `P(${result.target}) = ${prob6(result.probability)}`;
}

export function describeOptimize(result: OptimizeResponse): string {
  const objective =
    result.objective_value === undefined ? "?" : num(result.objective_value);
  return `${result.kind}: ${result.status}, objective ${objective}`;
}

export function renderFootprintPanel(fp: FootprintResponse): string {
  const rows = Object.entries(fp.receptors)
    .map(
      ([id, value]) =>
        `<tr><td>${escapeHtml(id)}</td><td class="value">${num(value)}</td></tr>`,
    )
    .join("");
  return (
    `<div class="panel footprint"><h3>Footprint of ${escapeHtml(fp.scenario_name)}</h3>` +
    `<table><thead><tr><th>Receptor</th><th>Value</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`
  );
}

export function renderCausalPanel(result: CausalResponse): string {
  return (
    `<div class="panel causal">` +
    `<h3>${escapeHtml(result.target)} <span class="kind">(${result.target_kind})</span></h3>` +
    `<p class="probability" data-role="probability">${prob6(result.probability)}</p>` +
    `<p class="timing">${num(result.elapsed_ms)} ms</p></div>`
  );
}

export function renderSensitivityTable(sensitivity: SensitivityDoc): string {
  const note = sensitivity.degenerate
    ? `<p class="note">Degenerate optimum: duals are one valid reading; ` +
      `interpret per-unit changes with care.</p>`
    : "";
  const rows = sensitivity.constraints
    .map((c) => {
      const cls = c.binding ? ` class="binding"` : "";
      return (
        `<tr${cls}><td>${escapeHtml(c.name || `#${c.index}`)}</td>` +
        `<td class="value">${num(c.dual)}</td>` +
        `<td>${c.binding ? "binding" : `slack ${num(c.slack)}`}</td></tr>`
      );
    })
    .join("");
  return (
    `${note}<table class="sensitivity">` +
    `<caption>Objective change per unit of limit (dual values)</caption>` +
    `<thead><tr><th>Constraint</th><th>Dual</th><th>State</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderOptimizePanel(result: OptimizeResponse): string {
  const parts: string[] = [
    `<div class="panel optimize"><h3>${escapeHtml(result.kind)}: ${result.status}</h3>`,
  ];
  if (result.objective_value !== undefined) {
    parts.push(
      `<p class="objective">Objective value: ` +
        `<span data-role="objective">${num(result.objective_value)}</span></p>`,
    );
  }
  if (result.chosen_activity) {
    parts.push(
      `<p class="chosen">Strongest activity: ${escapeHtml(result.chosen_activity)}</p>`,
    );
  }
  if (result.primal) {
    const active = Object.entries(result.primal).filter(([, v]) => v !== 0);
    const rows = active
      .map(
        ([id, value]) =>
          `<tr><td>${escapeHtml(id)}</td><td class="value">${num(value)}</td></tr>`,
      )
      .join("");
    parts.push(
      `<table class="primal"><caption>Nonzero solution values</caption>` +
        `<tbody>${rows}</tbody></table>`,
    );
  }
  if (result.sensitivity) {
    parts.push(renderSensitivityTable(result.sensitivity));
  }
  parts.push(`</div>`);
  return parts.join("");
}

/** Infeasible / unbounded / timeout outcomes get explanatory panels. */
export function renderOptimizeStatusPanel(status: string, kind?: string): string {
  const explanations: Record<string, string> = {
    infeasible:
      "No plan satisfies every constraint. Relax a receptor limit, lower a " +
      "demand bound, or raise the budget.",
    unbounded:
      "The objective can grow without limit: nothing caps the optimized " +
      "magnitudes. Add a receptor limit or a budget.",
    timeout: "The query exceeded the server's time budget.",
  };
  const label = kind ? `${kind}: ${status}` : status;
  return (
    `<div class="panel status ${escapeHtml(status)}">` +
    `<h3>${escapeHtml(label)}</h3>` +
    `<p>${escapeHtml(explanations[status] ?? "The optimization returned no value.")}</p></div>`
  );
}

export function renderHistory(history: HistoryEntry[]): string {
  if (!history.length) {
    return `<p class="placeholder">No queries yet in this session.</p>`;
  }
  const items = history
    .map(
      (entry) =>
        `<li><span class="when">${escapeHtml(entry.at)}</span> ` +
        `<span class="kind">[${entry.kind}]</span> ${escapeHtml(entry.summary)}</li>`,
    )
    .join("");
  return `<ol class="history">${items}</ol>`;
}
