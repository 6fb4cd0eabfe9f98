/** Shared HTML/number formatting for the render functions. */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Probabilities are always shown at six decimals. */
export function prob6(value: number): string {
  return value.toFixed(6);
}

/** General numeric display: up to six significant digits, no trailing noise. */
export function num(value: number): string {
  if (Number.isInteger(value)) return String(value);
  return String(Number(value.toPrecision(6)));
}
