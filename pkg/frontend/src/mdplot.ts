// SVG rendering of mirrored-density payloads. Pure string builders: the
// sames inputs yield byte-identical markup, and silhouettes are mirror
// symmetric around their series axis by construction.

import type { MdPlot, MdSeries } from "./api.js";

export interface PlotGeometry {
  width: number;
  height: number;
  marginLeft: number;
  marginRight: number;
  marginTop: number;
  marginBottom: number;
}

export const DEFAULT_GEOMETRY: PlotGeometry = {
  width: 760,
  height: 420,
  marginLeft: 64,
  marginRight: 16,
  marginTop: 18,
  marginBottom: 46,
};

const FILLS = ["#4878a8", "#e49444", "#5cab68", "#b85c8a", "#8a76b4", "#c6b04b"];

function fmt(v: number): string {
  return v.toFixed(2);
}

export function valueRange(plot: MdPlot): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const series of plot.series) {
    const pts = series.density.kernel_points;
    lo = Math.min(lo, pts[0]);
    hi = Math.max(hi, pts[pts.length - 1]);
  }
  for (const b of plot.boundaries) {
    lo = Math.min(lo, b);
    hi = Math.max(hi, b);
  }
  if (plot.overlay) {
    lo = Math.min(lo, plot.overlay.x[0]);
    hi = Math.max(hi, plot.overlay.x[plot.overlay.x.length - 1]);
  }
  return [lo, hi];
}

export interface ValueScale {
  (value: number): number;
  lo: number;
  hi: number;
}

export function makeValueScale(plot: MdPlot, geometry: PlotGeometry): ValueScale {
  const [rawLo, rawHi] = valueRange(plot);
  const pad = rawHi > rawLo ? 0.05 * (rawHi - rawLo) : 1;
  const lo = rawLo - pad;
  const hi = rawHi + pad;
  const plotHeight = geometry.height - geometry.marginTop - geometry.marginBottom;
  const scale = ((value: number) =>
    geometry.marginTop + (plotHeight * (hi - value)) / (hi - lo)) as ValueScale;
  scale.lo = lo;
  scale.hi = hi;
  return scale;
}

/** Mirror-symmetric silhouette path for one series around centerX. */
export function silhouettePath(
  series: MdSeries,
  centerX: number,
  halfWidth: number,
  yOf: (value: number) => number,
): string {
  const points = series.density.kernel_points;
  const dens = series.density.densities;
  const peak = Math.max(...dens, Number.MIN_VALUE);
  const right: string[] = [];
  const left: string[] = [];
  for (let i = 0; i < points.length; i++) {
    const dx = (halfWidth * dens[i]) / peak;
    const y = yOf(points[i]);
    right.push(`${fmt(centerX + dx)},${fmt(y)}`);
    left.push(`${fmt(centerX - dx)},${fmt(y)}`);
  }
  return `M ${right.join(" L ")} L ${left.reverse().join(" L ")} Z`;
}

export interface RenderOptions {
  geometry?: PlotGeometry;
  highlight?: (series: MdSeries) => boolean;
  markers?: { means?: number[]; selected?: number | null };
}

/** Full SVG markup for a mirrored-density payload. */
export function renderMdPlot(plot: MdPlot, options: RenderOptions = {}): string {
  const geometry = options.geometry ?? DEFAULT_GEOMETRY;
  const yOf = makeValueScale(plot, geometry);
  const plotWidth = geometry.width - geometry.marginLeft - geometry.marginRight;
  const plotHeight = geometry.height - geometry.marginTop - geometry.marginBottom;
  const slot = plotWidth / Math.max(plot.series.length, 1);
  const half = 0.42 * slot;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${geometry.width} ${geometry.height}" ` +
      `class="mdplot" data-series="${plot.series.length}">`,
  );
  const axisX = geometry.marginLeft - 8;
  parts.push(
    `<line x1="${fmt(axisX)}" y1="${fmt(geometry.marginTop)}" x2="${fmt(axisX)}" ` +
      `y2="${fmt(geometry.marginTop + plotHeight)}" class="axis"/>`,
  );
  const tickCount = 6;
  for (let t = 0; t < tickCount; t++) {
    const value = yOf.lo + ((yOf.hi - yOf.lo) * t) / (tickCount - 1);
    const y = yOf(value);
    parts.push(
      `<text x="${fmt(axisX - 4)}" y="${fmt(y + 4)}" class="tick" ` +
        `text-anchor="end">${value.toPrecision(3)}</text>`,
    );
  }

  plot.series.forEach((series, idx) => {
    const centerX = geometry.marginLeft + (idx + 0.5) * slot;
    const path = silhouettePath(series, centerX, half, yOf);
    const fill = FILLS[idx % FILLS.length];
    const highlighted = options.highlight ? options.highlight(series) : false;
    parts.push(
      `<path d="${path}" fill="${fill}" fill-opacity="0.55" stroke="${fill}"` +
        `${highlighted ? ' class="highlight"' : ""} data-label="${series.label}"/>`,
    );
    parts.push(
      `<text x="${fmt(centerX)}" y="${fmt(geometry.marginTop + plotHeight + 16)}" ` +
        `class="label" text-anchor="middle">${series.label}</text>`,
    );
    if (series.dip) {
      parts.push(
        `<text x="${fmt(centerX)}" y="${fmt(geometry.marginTop + plotHeight + 32)}" ` +
          `class="dip" text-anchor="middle">dip p = ${series.dip.p_value.toPrecision(3)}</text>`,
      );
    }
  });

  if (plot.overlay && plot.series.length > 0) {
    const centerX = geometry.marginLeft + 0.5 * slot;
    const peak = Math.max(...plot.overlay.density, Number.MIN_VALUE);
    for (const sign of [1, -1]) {
      const pts = plot.overlay.x
        .map(
          (v, i) =>
            `${fmt(centerX + (sign * half * plot.overlay!.density[i]) / peak)},${fmt(yOf(v))}`,
        )
        .join(" L ");
      parts.push(`<path d="M ${pts}" class="overlay" fill="none"/>`);
    }
  }

  for (const b of plot.boundaries) {
    const y = yOf(b);
    parts.push(
      `<line x1="${fmt(geometry.marginLeft)}" y1="${fmt(y)}" ` +
        `x2="${fmt(geometry.marginLeft + plotWidth)}" y2="${fmt(y)}" class="boundary"/>`,
    );
    parts.push(
      `<text x="${fmt(geometry.marginLeft + plotWidth - 4)}" y="${fmt(y - 5)}" ` +
        `class="boundary-label" text-anchor="end">boundary = ${b.toPrecision(4)}</text>`,
    );
  }

  const markers = options.markers;
  if (markers?.means) {
    markers.means.forEach((mean, idx) => {
      const y = yOf(mean);
      const selected = markers.selected === idx;
      parts.push(
        `<line x1="${fmt(geometry.marginLeft)}" y1="${fmt(y)}" ` +
          `x2="${fmt(geometry.marginLeft + plotWidth)}" y2="${fmt(y)}" ` +
          `class="mean-marker${selected ? " selected" : ""}" data-component="${idx}"/>`,
      );
    });
  }

  parts.push("</svg>");
  return parts.join("\n");
}
