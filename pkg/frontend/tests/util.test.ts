import { describe, expect, it, vi } from "vitest";

import { debounce, formatNumber, parseCsv, renormalizeWeights, splitLabels } from "../src/util.js";

describe("debounce", () => {
  it("fires once with the latest arguments after the wait", () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 150);
    fn(1);
    fn(2);
    vi.advanceTimersByTime(149);
    expect(calls).toEqual([]);
    fn(3);
    vi.advanceTimersByTime(150);
    expect(calls).toEqual([3]);
    vi.useRealTimers();
  });

  it("cancel drops the pending call", () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 150);
    fn(1);
    fn.cancel();
    vi.advanceTimersByTime(500);
    expect(calls).toEqual([]);
    vi.useRealTimers();
  });
});

describe("renormalizeWeights", () => {
  it("rescales to a unit sum", () => {
    const out = renormalizeWeights([0.7, 0.7]);
    expect(out[0]).toBeCloseTo(0.5, 12);
    expect(out.reduce((a, b) => a + b, 0)).toBeCloseTo(1, 12);
  });

  it("rejects non-positive sums", () => {
    expect(() => renormalizeWeights([0, 0])).toThrow();
  });
});

describe("parseCsv", () => {
  it("detects headers and parses numbers", () => {
    const parsed = parseCsv("x,y\n1,2\n3,4\n");
    expect(parsed.header).toEqual(["x", "y"]);
    expect(parsed.values).toEqual([
      [1, 2],
      [3, 4],
    ]);
  });

  it("handles headerless input", () => {
    const parsed = parseCsv("1,2\n3,4");
    expect(parsed.header).toBeNull();
    expect(parsed.values.length).toBe(2);
  });

  it("reports the offending cell", () => {
    expect(() => parseCsv("x,y\n1,2\n3,oops\n")).toThrow(/row 2, column 2/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("x,y\n1,2\n3\n")).toThrow(/ragged/);
  });
});

describe("splitLabels", () => {
  it("splits the cluster column off", () => {
    const parsed = parseCsv("x,y,cluster\n1,2,1\n3,4,2\n");
    const out = splitLabels(parsed);
    expect(out.labels).toEqual([1, 2]);
    expect(out.values).toEqual([
      [1, 2],
      [3, 4],
    ]);
    expect(out.featureNames).toEqual(["x", "y"]);
  });

  it("passes through without a label column", () => {
    const out = splitLabels(parseCsv("a,b\n1,2\n3,4\n"));
    expect(out.labels).toBeNull();
  });
});

describe("formatNumber", () => {
  it("formats NA for missing values", () => {
    expect(formatNumber(null)).toBe("NA");
    expect(formatNumber(0.123456)).toBe("0.1235");
  });
});
