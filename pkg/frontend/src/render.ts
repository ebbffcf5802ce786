/** HTML renderers. Every probability cell shows the server-sent number
 * verbatim (see format.probText); rows keep the order they arrived in. */

import type {
  HistoryEntry,
  Hypothesis,
  Phenomenon,
  PredictionRow,
  WorldVariable,
} from "./api.js";
import { barWidth, dimsText, escapeHtml, probText, valueText } from "./format.js";

function bar(p: number, kind: "prior" | "posterior"): string {
  return (
    `<span class="bar bar-${kind}" style="width: ${barWidth(p)}"></span>` +
    `<span class="prob">${probText(p)}</span>`
  );
}

export function renderPhenomenonOptions(
  phenomena: Phenomenon[],
  selected: number | null,
): string {
  return phenomena
    .map(
      (p) =>
        `<option value="${p.phi}"${p.phi === selected ? " selected" : ""}>` +
        `φ=${p.phi} — ${escapeHtml(p.description)}</option>`,
    )
    .join("");
}

export function renderHypotheses(hypotheses: Hypothesis[]): string {
  if (hypotheses.length === 0) {
    return `<p class="empty">No hypotheses for this phenomenon.</p>`;
  }
  const rows = hypotheses
    .map(
      (h) =>
        `<tr><td>υ=${h.upsilon}</td><td>${escapeHtml(h.name)}</td>` +
        `<td class="cell-prob">${bar(h.confidence, "prior")}</td></tr>`,
    )
    .join("");
  return (
    `<table><thead><tr><th></th><th>hypothesis</th><th>confidence</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderRanking(rows: PredictionRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No predictions match this selection.</p>`;
  }
  const body = rows
    .map(
      (r) =>
        `<tr><td>υ=${r.upsilon}</td><td class="cell-value">${valueText(r.value)}</td>` +
        `<td class="cell-prob">${bar(r.prior, "prior")}</td></tr>`,
    )
    .join("");
  return (
    `<table><thead><tr><th>hypothesis</th><th>value</th><th>confidence</th>` +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

/** Side-by-side prior/posterior table for an observation preview. */
export function renderPreview(rows: PredictionRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No predictions match this selection.</p>`;
  }
  const body = rows
    .map(
      (r) =>
        `<tr><td>υ=${r.upsilon}</td><td class="cell-value">${valueText(r.value)}</td>` +
        `<td class="cell-prob">${bar(r.prior, "prior")}</td>` +
        `<td class="cell-prob">${bar(r.posterior ?? 0, "posterior")}</td></tr>`,
    )
    .join("");
  return (
    `<table><thead><tr><th>hypothesis</th><th>value</th><th>prior</th>` +
    `<th>posterior</th></tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderHistory(entries: HistoryEntry[]): string {
  if (entries.length === 0) {
    return `<p class="empty">No committed observations.</p>`;
  }
  const items = entries
    .map(
      (e, i) =>
        `<li>#${i + 1}: ${escapeHtml(e.attr)}` +
        `${Object.keys(e.dims).length ? ` at ${escapeHtml(dimsText(e.dims))}` : ""}` +
        ` — y=${e.y}, σ=${e.sigma}</li>`,
    )
    .join("");
  return `<ol class="history">${items}</ol>`;
}

export function renderWorldTable(variables: WorldVariable[]): string {
  if (variables.length === 0) {
    return `<p class="empty">World table is empty.</p>`;
  }
  const rows = variables
    .map(
      (v) =>
        `<tr><td>x<sub>${v.id}</sub>${v.compound ? " (compound)" : ""}</td>` +
        `<td class="cell-marginals">${v.marginals.map(probText).join(", ")}</td></tr>`,
    )
    .join("");
  return (
    `<table><thead><tr><th>variable</th><th>marginals</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderError(message: string): string {
  return `<p class="error">${escapeHtml(message)}</p>`;
}
