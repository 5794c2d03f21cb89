// Interactive mixture editor: draggable mean markers on the density plot,
// weight and sd inputs per component. Edits are renormalized client-side,
// debounced, and committed through PUT /gmm/params; everything displayed
// afterwards (boundaries, overlay curve, GOF, QQ) comes from the response.

import type { MdPlot, ModelPayload } from "./api.js";
import { DEFAULT_GEOMETRY, makeValueScale, renderMdPlot } from "./mdplot.js";
import { formatNumber, renormalizeWeights } from "./util.js";

export interface EditorState {
  weights: number[];
  means: number[];
  sds: number[];
}

export function stateFromPayload(payload: ModelPayload): EditorState | null {
  if (!payload.model) return null;
  return {
    weights: [...payload.model.weights],
    means: [...payload.model.means],
    sds: [...payload.model.sds],
  };
}

/** Map a vertical pixel drag to a new mean value on the editor's scale. */
export function dragMean(
  state: EditorState,
  component: number,
  pixelY: number,
  yScale: { lo: number; hi: number },
  plotTop: number,
  plotHeight: number,
): EditorState {
  const frac = Math.min(Math.max((pixelY - plotTop) / plotHeight, 0), 1);
  const value = yScale.hi - frac * (yScale.hi - yScale.lo);
  const means = [...state.means];
  means[component] = value;
  return { ...state, means };
}

export function editWeight(state: EditorState, component: number, weight: number): EditorState {
  const weights = [...state.weights];
  weights[component] = Math.max(weight, 1e-6);
  return { ...state, weights: renormalizeWeights(weights) };
}

export function editSd(state: EditorState, component: number, sd: number): EditorState {
  const sds = [...state.sds];
  sds[component] = Math.max(sd, 1e-9);
  return { ...state, sds };
}

export interface EditorCallbacks {
  onCommit: (state: EditorState) => void;
  onRefit: () => void;
}

export class GmmEditorView {
  private state: EditorState | null = null;
  private payload: ModelPayload | null = null;
  private basePlot: MdPlot | null = null;
  private dragging: number | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly callbacks: EditorCallbacks,
  ) {}

  setDensity(plot: MdPlot): void {
    this.basePlot = plot;
    this.render();
  }

  /** Server response wins: replaces local state and every displayed number. */
  setPayload(payload: ModelPayload): void {
    this.payload = payload;
    this.state = stateFromPayload(payload);
    this.render();
  }

  get currentState(): EditorState | null {
    return this.state;
  }

  private plotWithServerArtifacts(): MdPlot | null {
    if (!this.basePlot) return null;
    return {
      ...this.basePlot,
      overlay: this.payload?.overlay ?? null,
      boundaries: this.payload?.bd !== null && this.payload?.bd !== undefined
        ? [this.payload.bd]
        : [],
    };
  }

  render(): void {
    this.root.replaceChildren();
    const plot = this.plotWithServerArtifacts();
    if (!plot || !this.payload) {
      const hint = document.createElement("p");
      hint.className = "empty-state";
      hint.textContent = "Select a metric and fit a model to edit it.";
      this.root.appendChild(hint);
      return;
    }

    const svgHolder = document.createElement("div");
    svgHolder.className = "editor-plot";
    svgHolder.innerHTML = renderMdPlot(plot, {
      markers: this.state ? { means: this.state.means, selected: this.dragging } : undefined,
    });
    this.root.appendChild(svgHolder);
    this.bindDrag(svgHolder, plot);

    const panel = document.createElement("div");
    panel.className = "editor-panel";
    this.state?.weights.forEach((_, idx) => panel.appendChild(this.componentRow(idx)));

    const refit = document.createElement("button");
    refit.textContent = "refit";
    refit.className = "refit";
    refit.addEventListener("click", () => this.callbacks.onRefit());
    panel.appendChild(refit);

    panel.appendChild(this.statsBlock());
    this.root.appendChild(panel);
  }

  private componentRow(idx: number): HTMLElement {
    const state = this.state!;
    const row = document.createElement("div");
    row.className = "component-row";
    row.dataset.component = String(idx);

    const label = document.createElement("span");
    label.textContent = `c${idx + 1}`;
    row.appendChild(label);

    const fields: [string, number, (v: number) => EditorState][] = [
      ["w", state.weights[idx], (v) => editWeight(state, idx, v)],
      ["m", state.means[idx], (v) => ({ ...state, means: state.means.map((m, i) => (i === idx ? v : m)) })],
      ["s", state.sds[idx], (v) => editSd(state, idx, v)],
    ];
    for (const [name, value, update] of fields) {
      const wrap = document.createElement("label");
      wrap.textContent = name;
      const input = document.createElement("input");
      input.type = "number";
      input.step = "0.01";
      input.value = value.toPrecision(5);
      input.name = `${name}${idx}`;
      input.addEventListener("change", () => {
        const v = Number(input.value);
        if (!Number.isNaN(v)) {
          this.state = update(v);
          this.commit();
        }
      });
      wrap.appendChild(input);
      row.appendChild(wrap);
    }
    return row;
  }

  private statsBlock(): HTMLElement {
    const payload = this.payload!;
    const block = document.createElement("dl");
    block.className = "model-stats";
    const rows: [string, string][] = [
      ["decision boundary", formatNumber(payload.bd)],
      ["chi-square p", payload.gof ? formatNumber(payload.gof.p_value, 3) : "NA"],
      ["QQ max deviation", payload.qq ? formatNumber(payload.qq.max_abs_deviation, 3) : "NA"],
      ["log-likelihood", payload.model ? formatNumber(payload.model.loglik ?? null) : "NA"],
    ];
    for (const [k, v] of rows) {
      const dt = document.createElement("dt");
      dt.textContent = k;
      const dd = document.createElement("dd");
      dd.textContent = v;
      dd.dataset.stat = k;
      block.append(dt, dd);
    }
    if (payload.warning) {
      const warn = document.createElement("p");
      warn.className = "warning";
      warn.textContent = payload.warning;
      block.appendChild(warn);
    }
    return block;
  }

  private bindDrag(holder: HTMLElement, plot: MdPlot): void {
    const svg = holder.querySelector("svg");
    if (!svg || !this.state) return;
    const yScale = makeValueScale(plot, DEFAULT_GEOMETRY);
    const plotTop = DEFAULT_GEOMETRY.marginTop;
    const plotHeight =
      DEFAULT_GEOMETRY.height - DEFAULT_GEOMETRY.marginTop - DEFAULT_GEOMETRY.marginBottom;

    const pixelY = (event: PointerEvent): number => {
      const rect = svg.getBoundingClientRect();
      return ((event.clientY - rect.top) / rect.height) * DEFAULT_GEOMETRY.height;
    };

    svg.querySelectorAll<SVGLineElement>(".mean-marker").forEach((marker) => {
      marker.addEventListener("pointerdown", (event) => {
        this.dragging = Number(marker.dataset.component);
        marker.setPointerCapture(event.pointerId);
      });
    });
    svg.addEventListener("pointermove", (event) => {
      if (this.dragging === null || !this.state) return;
      this.state = dragMean(this.state, this.dragging, pixelY(event), yScale, plotTop, plotHeight);
      this.commit();
    });
    svg.addEventListener("pointerup", () => {
      this.dragging = null;
    });
  }

  private commit(): void {
    if (this.state) this.callbacks.onCommit({ ...this.state });
  }
}
