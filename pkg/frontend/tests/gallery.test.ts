import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import type { ScanResult } from "../src/api.js";
import { galleryCards } from "../src/gallery.js";

const scanFixture = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "scan.json"), "utf-8"),
) as { session: string; scan: ScanResult };

describe("metric gallery", () => {
  it("renders one silhouette per scanned metric", () => {
    const cards = galleryCards(scanFixture.scan, 0.05);
    expect(cards.length).toBe(scanFixture.scan.entries.length);
    for (const card of cards) {
      expect(card.error).toBeNull();
      // every card holds exactly one mirrored silhouette
      expect(card.svg).toContain('data-series="1"');
      expect(card.svg!.match(/data-label=/g)!.length).toBe(1);
    }
  });

  it("orders cards by the served ranking", () => {
    const cards = galleryCards(scanFixture.scan, 0.05);
    expect(cards.map((c) => c.metric)).toEqual(scanFixture.scan.ranking);
  });

  it("highlights multimodal candidates below the threshold", () => {
    const cards = galleryCards(scanFixture.scan, 0.05);
    for (const card of cards) {
      const entry = scanFixture.scan.entries.find((e) => e.metric === card.metric)!;
      expect(card.highlighted).toBe(entry.dip !== null && entry.dip.p_value <= 0.05);
    }
    // threshold slider at 1.0 highlights everything with a dip result
    for (const card of galleryCards(scanFixture.scan, 1.0)) {
      expect(card.highlighted).toBe(true);
    }
  });

  it("shows dip p-values exactly as served", () => {
    for (const card of galleryCards(scanFixture.scan, 0.05)) {
      const entry = scanFixture.scan.entries.find((e) => e.metric === card.metric)!;
      expect(card.dipP).toBe(entry.dip!.p_value);
    }
  });
});
