import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it, vi } from "vitest";

import { ApiClient, ModelEditQueue } from "../src/api.js";
import type { ModelPayload } from "../src/api.js";
import { dragMean, editSd, editWeight, stateFromPayload } from "../src/editor.js";
import { formatNumber } from "../src/util.js";

const fitFixture = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "fit.json"), "utf-8"),
) as ModelPayload;
const putFixture = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "put.json"), "utf-8"),
) as ModelPayload;

function jsonResponse(payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "Content-Type": "application/json" },
  });
}

describe("editor state transitions", () => {
  it("builds editable state from the model payload", () => {
    const state = stateFromPayload(fitFixture)!;
    expect(state.means).toEqual(fitFixture.model!.means);
    expect(state.weights).toEqual(fitFixture.model!.weights);
  });

  it("dragging maps pixels onto the value scale", () => {
    const state = stateFromPayload(fitFixture)!;
    const scale = { lo: 0, hi: 1 };
    const top = 20;
    const height = 400;
    const atTop = dragMean(state, 1, top, scale, top, height);
    expect(atTop.means[1]).toBeCloseTo(1.0, 9);
    const atBottom = dragMean(state, 1, top + height, scale, top, height);
    expect(atBottom.means[1]).toBeCloseTo(0.0, 9);
    const mid = dragMean(state, 1, top + height / 2, scale, top, height);
    expect(mid.means[1]).toBeCloseTo(0.5, 9);
    // other components untouched
    expect(mid.means[0]).toBe(state.means[0]);
  });

  it("weight edits renormalize client-side before submission", () => {
    const state = stateFromPayload(fitFixture)!;
    const edited = editWeight(state, 0, 3.0);
    expect(edited.weights.reduce((a, b) => a + b, 0)).toBeCloseTo(1, 12);
  });

  it("sd edits stay positive", () => {
    const state = stateFromPayload(fitFixture)!;
    expect(editSd(state, 0, -5).sds[0]).toBeGreaterThan(0);
  });
});

describe("model edit round-trip", () => {
  it("dragging a mean issues PUT /gmm/params and the displayed boundary matches a direct GET", async () => {
    const puts: { url: string; body: any }[] = [];
    const fetchFn = vi.fn(async (url: string, init?: RequestInit) => {
      if (init?.method === "PUT") {
        puts.push({ url, body: JSON.parse(init.body as string) });
        return jsonResponse(putFixture);
      }
      return jsonResponse(putFixture); // GET /gmm serves the same stored model
    });
    const client = new ApiClient("", fetchFn);

    let displayedBd: string | null = null;
    const queue = new ModelEditQueue(client, (payload) => {
      displayedBd = formatNumber(payload.bd);
    });

    const dragged = dragMean(stateFromPayload(fitFixture)!, 1, 100, { lo: 0, hi: 1 }, 20, 400);
    queue.submit({ session: "fix", ...dragged });
    await vi.waitFor(() => expect(queue.pending).toBe(false));

    expect(puts.length).toBe(1);
    expect(puts[0].url).toBe("/gmm/params");
    expect(puts[0].body.means).toEqual(dragged.means);

    const direct = await client.getModel("fix");
    expect(displayedBd).toBe(formatNumber(direct.bd));
  });

  it("later edits supersede the in-flight one", async () => {
    const resolvers: ((r: Response) => void)[] = [];
    const bodies: any[] = [];
    const fetchFn = vi.fn((_url: string, init?: RequestInit) => {
      bodies.push(JSON.parse(init!.body as string));
      return new Promise<Response>((resolve) => resolvers.push(resolve));
    });
    const client = new ApiClient("", fetchFn);
    const results: (number | null)[] = [];
    const queue = new ModelEditQueue(client, (payload) => results.push(payload.bd));

    const base = stateFromPayload(fitFixture)!;
    queue.submit({ session: "fix", ...base, means: [0.1, 0.5] });
    queue.submit({ session: "fix", ...base, means: [0.1, 0.6] });
    queue.submit({ session: "fix", ...base, means: [0.1, 0.7] });

    // only the first request went out; the queue holds the latest edit
    expect(bodies.length).toBe(1);
    resolvers[0](jsonResponse({ ...putFixture, bd: 111 }));
    await vi.waitFor(() => expect(bodies.length).toBe(2));
    // intermediate edit (0.6) was replaced by the final one (0.7)
    expect(bodies[1].means).toEqual([0.1, 0.7]);
    resolvers[1](jsonResponse({ ...putFixture, bd: 222 }));
    await vi.waitFor(() => expect(queue.pending).toBe(false));
    // the superseded response was dropped: only the final one was displayed
    expect(results).toEqual([222]);
  });

  it("single-component payloads hide boundary markers", () => {
    const single: ModelPayload = { ...putFixture, model: { weights: [1], means: [0.3], sds: [0.1] }, boundaries: null, bd: null };
    expect(single.bd).toBeNull();
    expect(formatNumber(single.bd)).toBe("NA");
  });
});
