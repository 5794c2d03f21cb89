import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import type { EvaluateResponse } from "../src/api.js";
import { tableRows } from "../src/eq5.js";

const fixture = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "evaluate.json"), "utf-8"),
) as EvaluateResponse;

describe("partition evaluation table", () => {
  it("pass/fail flags match the served JSON byte-for-byte", () => {
    const rows = tableRows(fixture.reports);
    expect(rows.length).toBe(fixture.reports.length);
    fixture.reports.forEach((report, i) => {
      report.clusters.forEach((check, j) => {
        // the flag in the cell IS the served boolean, no recomputation
        expect(rows[i].cells[j].passed).toBe(check.passed);
      });
      const wantVerdict =
        report.overall_pass === null ? "NA" : report.overall_pass ? "pass" : "fail";
      expect(rows[i].verdict).toBe(wantVerdict);
    });
  });

  it("NA cells render for singleton clusters", () => {
    const synthetic: EvaluateResponse = {
      ...fixture,
      reports: [
        {
          schema: 1,
          name: "sparse",
          boundary: 1.0,
          clusters: [
            {
              cluster: 1,
              size: 5,
              n_intra: 10,
              median: 0.5,
              robust_sd: 0.1,
              criterion: 0.7,
              passed: true,
              pct_above: 0,
            },
            {
              cluster: 2,
              size: 1,
              n_intra: 0,
              median: null,
              robust_sd: null,
              criterion: null,
              passed: null,
              pct_above: null,
            },
          ],
          pct_above: 0,
          overall_pass: true,
        },
      ],
    };
    const rows = tableRows(synthetic.reports);
    expect(rows[0].cells[1].text).toBe("NA");
    expect(rows[0].cells[1].passed).toBeNull();
    expect(rows[0].verdict).toBe("pass");
  });

  it("every report has a mirrored-density plot with the boundary line", () => {
    for (const report of fixture.reports) {
      const plot = fixture.plots[report.name];
      expect(plot).toBeDefined();
      expect(plot.boundaries).toEqual([report.boundary]);
      expect(plot.series[0].label).toBe("all");
    }
  });
});
