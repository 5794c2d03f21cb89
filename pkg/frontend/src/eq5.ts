// Partition evaluation panel: published-results-style table with pass/fail
// coloring taken verbatim from the served report JSON, plus one mini
// mirrored-density plot per partition with the boundary rule line.

import type { EvaluateResponse, PartitionReport } from "./api.js";
import { DEFAULT_GEOMETRY, renderMdPlot } from "./mdplot.js";
import { formatNumber } from "./util.js";

export interface TableRow {
  name: string;
  cells: { text: string; passed: boolean | null }[];
  verdict: "pass" | "fail" | "NA";
}

/** Rows mirror the payload exactly: flags are the served booleans, untouched. */
export function tableRows(reports: PartitionReport[]): TableRow[] {
  const width = Math.max(...reports.map((r) => r.clusters.length), 0);
  return reports.map((report) => {
    const cells = [];
    for (let i = 0; i < width; i++) {
      const check = report.clusters[i];
      if (!check || check.passed === null) {
        cells.push({ text: "NA", passed: null });
      } else {
        cells.push({
          text: `${formatNumber(check.median, 3)}+${formatNumber(
            check.robust_sd === null ? null : 2 * check.robust_sd,
            3,
          )} = ${formatNumber(check.criterion, 3)}`,
          passed: check.passed,
        });
      }
    }
    const verdict =
      report.overall_pass === null ? "NA" : report.overall_pass ? "pass" : "fail";
    return { name: report.name, cells, verdict };
  });
}

export function renderEq5Panel(container: HTMLElement, response: EvaluateResponse): void {
  container.replaceChildren();
  if (response.reports.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No partitions evaluated yet.";
    container.appendChild(empty);
    return;
  }

  const table = document.createElement("table");
  table.className = "eq5-table";
  const head = document.createElement("tr");
  const width = Math.max(...response.reports.map((r) => r.clusters.length));
  head.appendChild(Object.assign(document.createElement("th"), { textContent: "partition" }));
  for (let i = 1; i <= width; i++) {
    head.appendChild(
      Object.assign(document.createElement("th"), { textContent: `m(t${i})+2sd(t${i})` }),
    );
  }
  head.appendChild(Object.assign(document.createElement("th"), { textContent: "verdict" }));
  head.appendChild(Object.assign(document.createElement("th"), { textContent: "intra > BD" }));
  table.appendChild(head);

  const rows = tableRows(response.reports);
  response.reports.forEach((report, rowIdx) => {
    const row = document.createElement("tr");
    row.dataset.partition = report.name;
    row.appendChild(Object.assign(document.createElement("td"), { textContent: report.name }));
    for (const cell of rows[rowIdx].cells) {
      const td = document.createElement("td");
      td.textContent = cell.text;
      td.className = cell.passed === null ? "na" : cell.passed ? "pass" : "fail";
      row.appendChild(td);
    }
    const verdict = document.createElement("td");
    verdict.textContent = rows[rowIdx].verdict;
    verdict.className = `verdict ${rows[rowIdx].verdict}`;
    row.appendChild(verdict);
    row.appendChild(
      Object.assign(document.createElement("td"), {
        textContent:
          report.pct_above === null ? "NA" : `${formatNumber(report.pct_above, 3)}%`,
      }),
    );
    table.appendChild(row);
  });
  container.appendChild(table);

  const plots = document.createElement("div");
  plots.className = "eq5-plots";
  for (const report of response.reports) {
    const plot = response.plots[report.name];
    if (!plot) continue;
    const card = document.createElement("figure");
    card.className = "eq5-plot";
    const caption = document.createElement("figcaption");
    caption.textContent = report.name;
    card.appendChild(caption);
    const holder = document.createElement("div");
    holder.innerHTML = renderMdPlot(plot, {
      geometry: { ...DEFAULT_GEOMETRY, width: 360, height: 240, marginLeft: 52 },
    });
    card.appendChild(holder);
    plots.appendChild(card);
  }
  container.appendChild(plots);
}
