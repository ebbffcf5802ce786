/** Display formatting. Probabilities are rendered with the exact decimal
 * representation the server sent (String of the parsed JSON number, which
 * round-trips IEEE doubles); bar widths are the only derived quantity and
 * exist purely for visualization. */

export function probText(p: number): string {
  return String(p);
}

/** Width of a probability bar in percent, clamped to [0, 100]. */
export function barWidth(p: number): string {
  const clamped = Math.min(1, Math.max(0, p));
  return `${(clamped * 100).toFixed(2)}%`;
}

export function valueText(v: number): string {
  return String(v);
}

export function dimsText(dims: Record<string, number>): string {
  return Object.entries(dims)
    .map(([k, v]) => `${k}=${v}`)
    .join(", ");
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
