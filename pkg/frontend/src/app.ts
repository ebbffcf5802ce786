/** Browser entry point: wires the API client, the preview/commit flow, and
 * the renderers to the static page. All state that matters lives on the
 * server; this module only holds view state. */

import { ApiClient, ApiError } from "./api.js";
import { ObservationFlow, parseDims, validateObservation } from "./flow.js";
import {
  renderError,
  renderHistory,
  renderHypotheses,
  renderPhenomenonOptions,
  renderPreview,
  renderRanking,
  renderWorldTable,
} from "./render.js";

const api = new ApiClient("");
const flow = new ObservationFlow();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(target: HTMLElement, err: unknown): void {
  const message = err instanceof ApiError ? err.message : String(err);
  target.innerHTML = renderError(message);
}

function currentPhi(): number {
  return Number(el<HTMLSelectElement>("phenomenon").value);
}

function queryForm(): { attr: string; dims: string } {
  return {
    attr: el<HTMLInputElement>("query-attr").value.trim(),
    dims: el<HTMLInputElement>("query-dims").value,
  };
}

async function refreshPhenomena(): Promise<void> {
  const select = el<HTMLSelectElement>("phenomenon");
  const phenomena = await api.phenomena();
  const selected = select.value !== "" ? Number(select.value) : null;
  select.innerHTML = renderPhenomenonOptions(
    phenomena,
    selected ?? phenomena[0]?.phi ?? null,
  );
}

async function refreshHypotheses(): Promise<void> {
  const panel = el("hypotheses");
  try {
    panel.innerHTML = renderHypotheses(await api.hypotheses(currentPhi()));
  } catch (err) {
    showError(panel, err);
  }
}

async function refreshRanking(): Promise<void> {
  const panel = el("ranking");
  const form = queryForm();
  if (form.attr === "") {
    panel.innerHTML = renderError("enter an attribute to rank");
    return;
  }
  try {
    const rows = await api.predictions(currentPhi(), form.attr, parseDims(form.dims));
    panel.innerHTML = renderRanking(rows);
  } catch (err) {
    showError(panel, err);
  }
}

async function refreshHistory(): Promise<void> {
  const panel = el("history-panel");
  try {
    panel.innerHTML = renderHistory(await api.history());
  } catch (err) {
    showError(panel, err);
  }
}

async function refreshWorldTable(): Promise<void> {
  const panel = el("worldtable");
  try {
    panel.innerHTML = renderWorldTable(await api.worldtable());
  } catch (err) {
    showError(panel, err);
  }
}

async function refreshAll(): Promise<void> {
  await Promise.all([
    refreshHypotheses(),
    refreshRanking(),
    refreshHistory(),
    refreshWorldTable(),
  ]);
}

function observationForm() {
  return {
    attr: el<HTMLInputElement>("obs-attr").value,
    dims: el<HTMLInputElement>("obs-dims").value,
    y: el<HTMLInputElement>("obs-y").value,
    sigma: el<HTMLInputElement>("obs-sigma").value,
  };
}

function syncCommitButton(): void {
  el<HTMLButtonElement>("obs-commit").disabled = !flow.canCommit;
}

async function onPreview(): Promise<void> {
  const panel = el("preview");
  const checked = validateObservation(observationForm());
  if (!checked.ok) {
    panel.innerHTML = renderError(checked.error);
    return;
  }
  const request = { ...checked.value, phi: currentPhi(), commit: false };
  try {
    const response = await api.observe(request);
    flow.notePreviewed(request, response.rows);
    panel.innerHTML = renderPreview(response.rows);
  } catch (err) {
    flow.clear();
    showError(panel, err);
  }
  syncCommitButton();
}

async function onCommit(): Promise<void> {
  const panel = el("preview");
  if (!flow.canCommit) return;
  try {
    await api.observe(flow.commitRequest());
    flow.clear();
    panel.innerHTML = "";
    await refreshAll();
  } catch (err) {
    showError(panel, err);
  }
  syncCommitButton();
}

async function onReset(): Promise<void> {
  try {
    await api.reset();
    flow.clear();
    el("preview").innerHTML = "";
    await refreshAll();
  } catch (err) {
    showError(el("preview"), err);
  }
  syncCommitButton();
}

export async function start(): Promise<void> {
  await refreshPhenomena();

  el("phenomenon").addEventListener("change", () => void refreshAll());
  el("query-refresh").addEventListener("click", () => void refreshRanking());
  el<HTMLInputElement>("query-attr").addEventListener("change", () =>
    void refreshRanking(),
  );
  el<HTMLInputElement>("query-dims").addEventListener("change", () =>
    void refreshRanking(),
  );

  for (const id of ["obs-attr", "obs-dims", "obs-y", "obs-sigma"]) {
    el(id).addEventListener("input", () => {
      flow.noteEdited();
      syncCommitButton();
    });
  }
  el("obs-preview").addEventListener("click", () => void onPreview());
  el("obs-commit").addEventListener("click", () => void onCommit());
  el("reset").addEventListener("click", () => void onReset());

  syncCommitButton();
  await refreshAll();
}

if (typeof document !== "undefined" && document.getElementById("phenomenon")) {
  void start();
}
