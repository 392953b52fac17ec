import { describe, expect, test } from "vitest";

import {
  MAX_FEATURE_ROWS,
  drawBoundCurve,
  grayscalePixels,
  renderFeatureTable,
  renderLeaves,
} from "../src/render.js";

describe("grayscalePixels", () => {
  test("min-max normalizes into opaque gray levels", () => {
    const pixels = grayscalePixels([0.0, 1.0, 0.5, 0.25], 2, 2);
    expect(pixels).toHaveLength(16);
    expect([...pixels.slice(0, 4)]).toEqual([0, 0, 0, 255]);
    expect([...pixels.slice(4, 8)]).toEqual([255, 255, 255, 255]);
    expect(pixels[8]).toBe(128);
    expect(pixels[12]).toBe(64);
  });

  test("constant input renders black, not NaN", () => {
    const pixels = grayscalePixels([3, 3, 3, 3], 2, 2);
    expect([...pixels.slice(0, 4)]).toEqual([0, 0, 0, 255]);
  });
});

describe("renderFeatureTable", () => {
  test("caps the rows and notes the overflow", () => {
    const container = document.createElement("div");
    const features = Array.from({ length: 40 }, (_, i) => i / 40);
    renderFeatureTable(container, features);
    expect(container.querySelectorAll(".feature-row")).toHaveLength(
      MAX_FEATURE_ROWS,
    );
    expect(container.querySelector(".feature-note")?.textContent).toContain(
      "16 more",
    );
  });

  test("re-rendering replaces rather than appends", () => {
    const container = document.createElement("div");
    renderFeatureTable(container, [1, 2]);
    renderFeatureTable(container, [1, 2]);
    expect(container.querySelectorAll(".feature-row")).toHaveLength(2);
  });
});

describe("renderLeaves", () => {
  test("orders by size and scales the uniformity bar", () => {
    const container = document.createElement("div");
    renderLeaves(container, [
      { id: 1, N: 10, n: 2, m: 1, majority_class: 0, uniformity: 0.5 },
      { id: 2, N: 40, n: 8, m: 8, majority_class: 3, uniformity: 1.0 },
    ]);
    const rows = [...container.querySelectorAll<HTMLElement>(".leaf-row")];
    expect(rows.map((row) => row.dataset.leafId)).toEqual(["2", "1"]);
    const bar = rows[0].querySelector<HTMLElement>(
      ".leaf-uniformity-bar > span",
    );
    expect(bar?.style.width).toBe("100%");
    expect(rows[0].textContent).toContain("8/40");
  });

  test("unlabeled leaf shows a placeholder majority", () => {
    const container = document.createElement("div");
    renderLeaves(container, [
      { id: 0, N: 5, n: 0, m: 0, majority_class: null, uniformity: 0 },
    ]);
    expect(container.querySelector(".leaf-majority")?.textContent).toBe("–");
  });
});

test("drawBoundCurve tolerates a context-less canvas", () => {
  // jsdom has no 2d context; drawing must degrade to a no-op
  const canvas = document.createElement("canvas");
  expect(() => drawBoundCurve(canvas, [1, 2, 3])).not.toThrow();
});
