import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import type { MdPlot } from "../src/api.js";
import { DEFAULT_GEOMETRY, makeValueScale, renderMdPlot, silhouettePath } from "../src/mdplot.js";

const densityFixture = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "density.json"), "utf-8"),
) as { plot: MdPlot };

describe("silhouettePath", () => {
  it("is mirror symmetric around the series axis", () => {
    const series = densityFixture.plot.series[0];
    const path = silhouettePath(series, 200, 80, (v) => v * 10);
    const pairs = path
      .replace(/^M /, "")
      .replace(/ Z$/, "")
      .split(" L ")
      .map((p) => p.split(",").map(Number));
    const n = pairs.length / 2;
    for (let i = 0; i < n; i++) {
      const right = pairs[i];
      const left = pairs[pairs.length - 1 - i];
      // same height, offsets mirrored about the center
      expect(left[1]).toBe(right[1]);
      expect(left[0] + right[0]).toBeCloseTo(400, 6);
    }
  });
});

describe("renderMdPlot", () => {
  it("is deterministic", () => {
    const one = renderMdPlot(densityFixture.plot);
    const two = renderMdPlot(densityFixture.plot);
    expect(one).toBe(two);
  });

  it("draws a boundary rule when present", () => {
    const plot = { ...densityFixture.plot, boundaries: [0.5] };
    const markup = renderMdPlot(plot);
    expect(markup).toContain('class="boundary"');
    expect(markup).toContain("boundary = 0.5000");
  });

  it("draws the overlay mirrored on the first slot", () => {
    const plot = {
      ...densityFixture.plot,
      overlay: { x: [0.1, 0.2, 0.3], density: [1, 2, 1] },
    };
    const markup = renderMdPlot(plot);
    expect(markup.match(/class="overlay"/g)!.length).toBe(2);
  });

  it("marks means as draggable markers", () => {
    const markup = renderMdPlot(densityFixture.plot, {
      markers: { means: [0.2, 0.8], selected: 1 },
    });
    expect(markup.match(/mean-marker/g)!.length).toBe(2);
    expect(markup).toContain('class="mean-marker selected" data-component="1"');
  });

  it("value scale covers boundaries outside the density range", () => {
    const plot = { ...densityFixture.plot, boundaries: [99.0] };
    const scale = makeValueScale(plot, DEFAULT_GEOMETRY);
    expect(scale.hi).toBeGreaterThan(99.0);
    const y = scale(99.0);
    expect(y).toBeGreaterThan(DEFAULT_GEOMETRY.marginTop);
  });
});
