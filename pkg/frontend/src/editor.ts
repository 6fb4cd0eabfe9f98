/** Scenario editor: magnitude inputs grouped by activity category, save
 * with optimistic concurrency, inline validation messages. */

import type { ActivityInfo, MatrixSummary } from "./types.js";
import type { DraftValidationIssue, ScenarioDraft } from "./draft.js";
import { hasConflict } from "./draft.js";
import { escapeHtml, num } from "./format.js";

const CATEGORY_LABELS: Record<string, string> = {
  infrastructures_plants: "Infrastructures and plants",
  buildings_land_use: "Buildings and land use",
  resource_extraction: "Resource extraction",
  hydraulic_modifications: "Hydraulic modifications",
  industrial_transformations: "Industrial transformations",
  environmental_management: "Environmental management",
};

export function groupByCategory(
  activities: ActivityInfo[],
): Map<string, ActivityInfo[]> {
  const groups = new Map<string, ActivityInfo[]>();
  for (const activity of activities) {
    const list = groups.get(activity.category) ?? [];
    list.push(activity);
    groups.set(activity.category, list);
  }
  return groups;
}

export function renderConflictBanner(draft: ScenarioDraft): string {
  if (!hasConflict(draft)) return "";
  return (
    `<div class="banner conflict" data-role="conflict-banner">` +
    `Someone else saved version ${draft.conflictVersion} of this scenario ` +
    `while you were editing version ${draft.version}. ` +
    `<button data-action="reload-scenario">Reload</button> ` +
    `<button data-action="overwrite-scenario">Overwrite</button></div>`
  );
}

export function renderEditor(
  summary: MatrixSummary,
  draft: ScenarioDraft,
  issues: DraftValidationIssue[] = [],
): string {
  if (!summary.loaded || !summary.activities) {
    return `<p class="placeholder">Upload a matrix set to start editing.</p>`;
  }
  const issueFor = new Map(issues.map((i) => [i.path, i.message]));
  const sections: string[] = [renderConflictBanner(draft)];

  sections.push(
    `<div class="editor-head">` +
      `<label>Scenario name <input data-field="name" value="${escapeHtml(draft.name)}"></label>` +
      `<span class="version">${draft.version === null ? "unsaved" : `v${draft.version}`}</span>` +
      `<button data-action="save-scenario"${issues.length ? " disabled" : ""}>Save</button>` +
      `</div>`,
  );

  for (const [category, activities] of groupByCategory(summary.activities)) {
    const rows = activities
      .map((a) => {
        const value = draft.magnitudes[a.id];
        const issue = issueFor.get(`magnitudes.${a.id}`);
        return (
          `<tr><td>${escapeHtml(a.name)}</td>` +
          `<td><input type="number" min="0" data-magnitude="${escapeHtml(a.id)}" ` +
          `value="${value === undefined ? "" : num(value)}"></td>` +
          `<td class="unit">${escapeHtml(a.unit)}</td>` +
          `<td class="issue">${issue ? escapeHtml(issue) : ""}</td></tr>`
        );
      })
      .join("");
    sections.push(
      `<section class="category"><h3>${escapeHtml(
        CATEGORY_LABELS[category] ?? category,
      )}</h3>` +
        `<table><thead><tr><th>Activity</th><th>Magnitude</th><th>Unit</th><th></th></tr></thead>` +
        `<tbody>${rows}</tbody></table></section>`,
    );
  }

  const limits = (summary.receptors ?? [])
    .map((r) => {
      const value = draft.receptorLimits[r.id];
      return (
        `<tr><td>${escapeHtml(r.name)}</td>` +
        `<td><input type="number" data-limit="${escapeHtml(r.id)}" ` +
        `value="${value === undefined ? "" : num(value)}"></td></tr>`
      );
    })
    .join("");
  sections.push(
    `<section class="limits"><h3>Receptor limits (upper bounds)</h3>` +
      `<table><tbody>${limits}</tbody></table></section>`,
  );

  return sections.join("\n");
}
