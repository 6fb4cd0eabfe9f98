/** Comparison view: scatter of linear (x) vs probability (y) plus the
 * divergence-ranked outlier list.  SVG is assembled as a string so the
 * mapping from values to pixels is directly testable. */

import type { DivergenceEntry, ScatterRow } from "./types.js";
import { escapeHtml, num, prob6 } from "./format.js";

/** Minimal CSV reader for the scatter export (handles quoted fields). */
export function parseScatterCsv(text: string): ScatterRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (!lines.length) return [];
  const header = splitCsvLine(lines[0]!);
  if (header.join(",") !== "linear,probability,activity,receptor") {
    throw new Error(`unexpected scatter header: ${lines[0]}`);
  }
  return lines.slice(1).map((line) => {
    const [linear, probability, activity, receptor] = splitCsvLine(line);
    return {
      linear: Number(linear),
      probability: Number(probability),
      activity: activity ?? "",
      receptor: receptor ?? "",
    };
  });
}

function splitCsvLine(line: string): string[] {
  const fields: string[] = [];
  let current = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        current += '"';
        i++;
      } else if (ch === '"') {
        quoted = false;
      } else {
        current += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      fields.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  fields.push(current);
  return fields;
}

export interface ScatterScales {
  x(linear: number): number;
  y(probability: number): number;
  width: number;
  height: number;
  pad: number;
}

/** Linear values map left-to-right on x; probabilities bottom-to-top on y
 * (SVG pixel y grows downward, so higher probability means a smaller y). */
export function computeScales(
  rows: ScatterRow[],
  width = 560,
  height = 360,
  pad = 40,
): ScatterScales {
  let lo = Math.min(0, ...rows.map((r) => r.linear));
  let hi = Math.max(0, ...rows.map((r) => r.linear));
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const x = (linear: number) =>
    pad + ((linear - lo) / (hi - lo)) * (width - 2 * pad);
  // probability axis is fixed to [0, 1]
  const y = (probability: number) =>
    height - pad - probability * (height - 2 * pad);
  return { x, y, width, height, pad };
}

export function renderScatterSvg(
  rows: ScatterRow[],
  outlierKeys: Set<string> = new Set(),
): string {
  const scales = computeScales(rows);
  const { width, height, pad } = scales;
  const points = rows
    .map((row) => {
      const key = `${row.activity}|${row.receptor}`;
      const cls = outlierKeys.has(key) ? "point outlier" : "point";
      return (
        `<circle class="${cls}" cx="${num(scales.x(row.linear))}" ` +
        `cy="${num(scales.y(row.probability))}" r="3" ` +
        `data-activity="${escapeHtml(row.activity)}" ` +
        `data-receptor="${escapeHtml(row.receptor)}">` +
        `<title>${escapeHtml(row.activity)} / ${escapeHtml(row.receptor)}: ` +
        `linear ${num(row.linear)}, p ${prob6(row.probability)}</title></circle>`
      );
    })
    .join("");
  const midY = scales.y(0.5);
  const zeroX = scales.x(0);
  return (
    `<svg viewBox="0 0 ${width} ${height}" class="scatter" role="img">` +
    `<line class="axis" x1="${pad}" y1="${height - pad}" x2="${width - pad}" y2="${height - pad}"/>` +
    `<line class="axis" x1="${pad}" y1="${pad}" x2="${pad}" y2="${height - pad}"/>` +
    `<line class="guide" x1="${pad}" y1="${num(midY)}" x2="${width - pad}" y2="${num(midY)}"/>` +
    `<line class="guide" x1="${num(zeroX)}" y1="${pad}" x2="${num(zeroX)}" y2="${height - pad}"/>` +
    `<text class="axis-label x" x="${width / 2}" y="${height - 6}">linear model value</text>` +
    `<text class="axis-label y" x="12" y="${height / 2}" transform="rotate(-90 12 ${height / 2})">probability</text>` +
    points +
    `</svg>`
  );
}

export function renderDivergenceList(
  entries: DivergenceEntry[],
  topN = 10,
): string {
  if (!entries.length) {
    return `<p class="placeholder">No divergence data.</p>`;
  }
  const rows = entries
    .slice(0, topN)
    .map(
      (entry) =>
        `<tr class="divergence-row" data-activity="${escapeHtml(entry.activity)}" ` +
        `data-receptor="${escapeHtml(entry.receptor)}">` +
        `<td>${escapeHtml(entry.activity)}</td><td>${escapeHtml(entry.receptor)}</td>` +
        `<td class="value">${num(entry.linear)}</td>` +
        `<td class="value">${prob6(entry.probability)}</td>` +
        `<td class="value">${num(entry.residual)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="divergence"><caption>Cells farthest from the monotone fit</caption>` +
    `<thead><tr><th>Activity</th><th>Receptor</th><th>Linear</th>` +
    `<th>Probability</th><th>Residual</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function outlierKeySet(
  entries: DivergenceEntry[],
  topN = 10,
): Set<string> {
  return new Set(
    entries.slice(0, topN).map((e) => `${e.activity}|${e.receptor}`),
  );
}
