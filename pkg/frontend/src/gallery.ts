// Metric gallery: one mirrored-density silhouette per scanned metric, dip
// p-value attached; clicking a card selects that metric for modeling.
// Cards whose dip p-value falls at or below the user-set threshold are
// highlighted as multimodal candidates.

import type { ScanEntry, ScanResult } from "./api.js";
import { DEFAULT_GEOMETRY, renderMdPlot } from "./mdplot.js";

export interface GalleryCard {
  metric: string;
  error: string | null;
  dipP: number | null;
  highlighted: boolean;
  svg: string | null;
}

export function galleryCards(scan: ScanResult, dipThreshold: number): GalleryCard[] {
  const byName = new Map(scan.entries.map((e) => [e.metric, e] as [string, ScanEntry]));
  return scan.ranking.map((metric) => {
    const entry = byName.get(metric)!;
    const dipP = entry.dip ? entry.dip.p_value : null;
    return {
      metric,
      error: entry.error,
      dipP,
      highlighted: dipP !== null && dipP <= dipThreshold,
      svg: entry.plot
        ? renderMdPlot(entry.plot, {
            geometry: { ...DEFAULT_GEOMETRY, width: 300, height: 210, marginLeft: 46 },
          })
        : null,
    };
  });
}

export function renderGallery(
  container: HTMLElement,
  scan: ScanResult,
  dipThreshold: number,
  onSelect: (metric: string) => void,
): void {
  container.replaceChildren();
  if (scan.entries.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No metrics scanned yet. Load a dataset and run a scan.";
    container.appendChild(empty);
    return;
  }
  for (const card of galleryCards(scan, dipThreshold)) {
    const el = document.createElement("div");
    el.className = "metric-card" + (card.highlighted ? " candidate" : "");
    el.dataset.metric = card.metric;

    const title = document.createElement("h3");
    title.textContent = card.metric;
    el.appendChild(title);

    if (card.error) {
      const err = document.createElement("p");
      err.className = "inline-error";
      err.textContent = card.error;
      el.appendChild(err);
    } else if (card.svg) {
      const holder = document.createElement("div");
      holder.innerHTML = card.svg;
      el.appendChild(holder);
      const dip = document.createElement("p");
      dip.className = "dip-note";
      dip.textContent = card.dipP !== null ? `dip p = ${card.dipP.toPrecision(3)}` : "";
      el.appendChild(dip);
      el.addEventListener("click", () => onSelect(card.metric));
    }
    container.appendChild(el);
  }
  if (scan.note) {
    const note = document.createElement("p");
    note.className = "scan-note";
    note.textContent = scan.note;
    container.appendChild(note);
  }
}
