// Application wiring: dataset entry, metric gallery, mixture editor, and the
// partition evaluation panel, all driven by the server's JSON payloads.

import { ApiClient, ModelEditQueue } from "./api.js";
import type { EvaluateResponse, MdPlot, ModelPayload, PartitionSpec, ScanResult } from "./api.js";
import { GmmEditorView } from "./editor.js";
import { renderEq5Panel } from "./eq5.js";
import { renderGallery } from "./gallery.js";
import { debounce, parseCsv, splitLabels } from "./util.js";

const client = new ApiClient("");

interface AppState {
  session: string | null;
  scan: ScanResult | null;
  metric: string | null;
  labels: number[] | null;
  model: ModelPayload | null;
  dipThreshold: number;
}

const state: AppState = {
  session: null,
  scan: null,
  metric: null,
  labels: null,
  model: null,
  dipThreshold: 0.05,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string, isError = false): void {
  const status = el<HTMLElement>("status");
  status.textContent = text;
  status.className = isError ? "status error" : "status";
}

function showGallery(): void {
  if (!state.scan) return;
  renderGallery(el("gallery"), state.scan, state.dipThreshold, (metric) => {
    state.metric = metric;
    void fitModel();
  });
}

const editor = new GmmEditorView(el("editor"), {
  onCommit: (edited) => {
    if (!state.session) return;
    scheduleEdit({ session: state.session, ...edited });
  },
  onRefit: () => void fitModel(),
});

const editQueue = new ModelEditQueue(
  client,
  (payload) => {
    state.model = payload;
    editor.setPayload(payload);
    setStatus(`model updated (boundary ${payload.bd === null ? "none" : payload.bd.toPrecision(4)})`);
  },
  (error) => setStatus(String(error), true),
);

// one commit at most every 150 ms while dragging; the queue then guarantees a
// single in-flight request with later edits superseding earlier ones
const scheduleEdit = debounce(
  (edit: { session: string; weights: number[]; means: number[]; sds: number[] }) =>
    editQueue.submit(edit),
  150,
);

async function runScan(): Promise<void> {
  try {
    const parsed = splitLabels(parseCsv(el<HTMLTextAreaElement>("csv-input").value));
    const metrics = el<HTMLInputElement>("metrics-input")
      .value.split(",")
      .map((m) => m.trim())
      .filter((m) => m.length > 0);
    setStatus("scanning metrics...");
    const response = await client.scan({
      data: { values: parsed.values, feature_names: parsed.featureNames ?? undefined },
      labels: parsed.labels ?? undefined,
      metrics,
      seed: Number(el<HTMLInputElement>("seed-input").value) || 0,
    });
    state.session = response.session;
    state.scan = response.scan;
    state.labels = parsed.labels;
    state.metric = null;
    state.model = null;
    setStatus(`scan done; ranking: ${response.scan.ranking.join(", ")}. Click a metric to model it.`);
    showGallery();
  } catch (error) {
    setStatus(String(error), true);
  }
}

async function fitModel(): Promise<void> {
  if (!state.session || !state.metric) return;
  try {
    const m = Number(el<HTMLInputElement>("components-input").value) || 2;
    setStatus(`fitting ${m}-component mixture to ${state.metric}...`);
    const payload = await client.fit({ session: state.session, metric: state.metric, m });
    state.model = payload;
    const density = await client.density(state.metric, state.session);
    editor.setDensity(stripBoundaries(density.plot));
    editor.setPayload(payload);
    setStatus(
      payload.warning
        ? `fitted with warning: ${payload.warning}`
        : `fitted ${state.metric}; boundary ${payload.bd === null ? "none" : payload.bd.toPrecision(4)}`,
    );
  } catch (error) {
    setStatus(String(error), true);
  }
}

function stripBoundaries(plot: MdPlot): MdPlot {
  // scan-time plots carry no model; the editor adds server boundaries itself
  return { ...plot, boundaries: [] };
}

async function evaluatePartitions(): Promise<void> {
  if (!state.session) return;
  const partitions: PartitionSpec[] = [];
  if (state.labels) partitions.push({ name: "labels", labels: state.labels });
  const specs = el<HTMLInputElement>("clusterers-input").value;
  for (const spec of specs.split(",").map((s) => s.trim()).filter((s) => s.length > 0)) {
    const [algorithm, k] = spec.split(":");
    partitions.push({ name: spec, algorithm, k: Number(k) || 2 });
  }
  if (partitions.length === 0) {
    setStatus("nothing to evaluate: no labels and no clusterers", true);
    return;
  }
  try {
    setStatus("evaluating partitions...");
    const response: EvaluateResponse = await client.evaluate({
      session: state.session,
      partitions,
    });
    renderEq5Panel(el("eq5"), response);
    setStatus("evaluation done");
  } catch (error) {
    setStatus(String(error), true);
  }
}

export function boot(): void {
  el<HTMLButtonElement>("scan-button").addEventListener("click", () => void runScan());
  el<HTMLButtonElement>("evaluate-button").addEventListener("click", () => void evaluatePartitions());
  const slider = el<HTMLInputElement>("dip-threshold");
  slider.addEventListener("input", () => {
    state.dipThreshold = Number(slider.value);
    el<HTMLElement>("dip-threshold-value").textContent = slider.value;
    showGallery();
  });
  setStatus("paste CSV data (optional 'cluster' label column) and scan");
}

if (typeof document !== "undefined" && document.getElementById("scan-button")) {
  boot();
}
