// Small pure helpers shared by the UI modules.

/** Debounce trailing-edge: the callback runs `wait` ms after the last call. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  wait: number,
  timers: { set: typeof setTimeout; clear: typeof clearTimeout } = {
    set: setTimeout,
    clear: clearTimeout,
  },
): { (...args: A): void; cancel(): void; flush(): void } {
  let handle: ReturnType<typeof setTimeout> | null = null;
  let last: A | null = null;
  const run = () => {
    handle = null;
    if (last !== null) {
      const args = last;
      last = null;
      fn(...args);
    }
  };
  const wrapped = (...args: A) => {
    last = args;
    if (handle !== null) timers.clear(handle);
    handle = timers.set(run, wait);
  };
  wrapped.cancel = () => {
    if (handle !== null) timers.clear(handle);
    handle = null;
    last = null;
  };
  wrapped.flush = () => {
    if (handle !== null) timers.clear(handle);
    run();
  };
  return wrapped;
}

/** Rescale weights to sum to exactly one (client-side edits drift). */
export function renormalizeWeights(weights: number[]): number[] {
  const total = weights.reduce((acc, w) => acc + w, 0);
  if (!(total > 0)) throw new Error("weights must have a positive sum");
  return weights.map((w) => w / total);
}

/** Fixed display formatting so comparisons against payloads are stable. */
export function formatNumber(value: number | null | undefined, digits = 4): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "NA";
  return value.toPrecision(digits);
}

/** Parse numeric CSV text into a matrix (header row autodetected). */
export function parseCsv(text: string): { values: number[][]; header: string[] | null } {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length === 0) throw new Error("empty CSV");
  const rows = lines.map((line) => line.split(","));
  const first = rows[0].map((cell) => Number(cell));
  const hasHeader = first.some((v) => Number.isNaN(v));
  const header = hasHeader ? rows[0].map((c) => c.trim()) : null;
  const body = hasHeader ? rows.slice(1) : rows;
  const width = body[0]?.length ?? 0;
  const values = body.map((row, i) => {
    if (row.length !== width) throw new Error(`ragged CSV row ${i + 1}`);
    return row.map((cell, j) => {
      const v = Number(cell);
      if (Number.isNaN(v)) throw new Error(`cannot parse ${cell} at row ${i + 1}, column ${j + 1}`);
      return v;
    });
  });
  if (values.length < 2) throw new Error("need at least 2 data rows");
  return { values, header };
}

/** Split off an integer label column by header name, if present. */
export function splitLabels(
  parsed: { values: number[][]; header: string[] | null },
  labelName = "cluster",
): { values: number[][]; labels: number[] | null; featureNames: string[] | null } {
  const { values, header } = parsed;
  const idx = header ? header.indexOf(labelName) : -1;
  if (idx < 0) return { values, labels: null, featureNames: header };
  return {
    values: values.map((row) => row.filter((_, j) => j !== idx)),
    labels: values.map((row) => Math.round(row[idx])),
    featureNames: header ? header.filter((_, j) => j !== idx) : null,
  };
}
