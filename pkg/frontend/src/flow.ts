/** Observation form validation and the preview-then-commit state machine.
 * Pure logic, no DOM: the commit call can only ever be built from a
 * preview that is still current. */

import type { ObservationRequest, PredictionRow } from "./api.js";

export interface ObservationFormInput {
  attr: string;
  dims: string; // "t=3, x=1.5"
  y: string;
  sigma: string;
}

export type ValidationResult =
  | { ok: true; value: Omit<ObservationRequest, "commit" | "phi"> }
  | { ok: false; error: string };

export function parseDims(text: string): Record<string, number> {
  const dims: Record<string, number> = {};
  const trimmed = text.trim();
  if (trimmed === "") return dims;
  for (const part of trimmed.split(",")) {
    const item = part.trim();
    const eq = item.indexOf("=");
    if (eq <= 0) {
      throw new Error(`expected dim=value, got "${item}"`);
    }
    const key = item.slice(0, eq).trim();
    const value = Number(item.slice(eq + 1).trim());
    if (item.slice(eq + 1).trim() === "" || Number.isNaN(value)) {
      throw new Error(`non-numeric dim value in "${item}"`);
    }
    dims[key] = value;
  }
  return dims;
}

export function validateObservation(form: ObservationFormInput): ValidationResult {
  const attr = form.attr.trim();
  if (attr === "") {
    return { ok: false, error: "attribute is required" };
  }
  let dims: Record<string, number>;
  try {
    dims = parseDims(form.dims);
  } catch (err) {
    return { ok: false, error: (err as Error).message };
  }
  const y = Number(form.y.trim());
  if (form.y.trim() === "" || Number.isNaN(y)) {
    return { ok: false, error: "observed value must be a number" };
  }
  const sigma = Number(form.sigma.trim());
  if (form.sigma.trim() === "" || Number.isNaN(sigma)) {
    return { ok: false, error: "sigma must be a number" };
  }
  if (sigma <= 0) {
    return { ok: false, error: "sigma must be positive" };
  }
  return { ok: true, value: { attr, dims, y, sigma } };
}

interface PreviewState {
  request: ObservationRequest;
  rows: PredictionRow[];
  stale: boolean;
}

export class ObservationFlow {
  private preview: PreviewState | null = null;

  get previewRows(): PredictionRow[] | null {
    return this.preview ? this.preview.rows : null;
  }

  get previewStale(): boolean {
    return this.preview !== null && this.preview.stale;
  }

  /** Any edit to the form invalidates an existing preview. */
  noteEdited(): void {
    if (this.preview) this.preview.stale = true;
  }

  notePreviewed(request: ObservationRequest, rows: PredictionRow[]): void {
    this.preview = { request: { ...request, commit: false }, rows, stale: false };
  }

  get canCommit(): boolean {
    return this.preview !== null && !this.preview.stale;
  }

  /** The committing request is the previewed one, verbatim, plus the
   * commit flag; callable only while the preview is current. */
  commitRequest(): ObservationRequest {
    if (!this.preview || this.preview.stale) {
      throw new Error("commit requires a current preview");
    }
    return { ...this.preview.request, commit: true };
  }

  clear(): void {
    this.preview = null;
  }
}
