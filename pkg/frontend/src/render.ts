/** DOM and canvas rendering for the console.
 *
 * Everything here displays numbers straight from service snapshots. Canvas
 * drawing degrades to a no-op where no 2d context exists (jsdom) so the
 * surrounding logic stays testable.
 */

import type { LeafView } from "./api.js";

export const MAX_FEATURE_ROWS = 24;

/** Min-max normalize features into RGBA bytes for a height x width raster. */
export function grayscalePixels(features: number[], height: number, width: number) {
  const pixels = new Uint8ClampedArray(height * width * 4);
  let lo = Infinity;
  let hi = -Infinity;
  for (const value of features) {
    if (value < lo) lo = value;
    if (value > hi) hi = value;
  }
  const span = hi - lo;
  for (let i = 0; i < height * width; i++) {
    const level = span > 0 ? Math.round((255 * (features[i] - lo)) / span) : 0;
    pixels[4 * i] = level;
    pixels[4 * i + 1] = level;
    pixels[4 * i + 2] = level;
    pixels[4 * i + 3] = 255;
  }
  return pixels;
}

/** Paint one example as a grayscale raster (e.g. a 28x28 digit). */
export function drawExample(
  canvas: HTMLCanvasElement,
  features: number[],
  hint: [number, number],
): void {
  const [height, width] = hint;
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  ctx.putImageData(
    new ImageData(grayscalePixels(features, height, width), width, height),
    0,
    0,
  );
}

/** Bar-per-feature view for datasets without a render hint. */
export function renderFeatureTable(
  container: HTMLElement,
  features: number[],
): void {
  container.innerHTML = "";
  let lo = Math.min(...features, 0);
  let hi = Math.max(...features, 0);
  if (hi === lo) {
    hi = lo + 1;
  }
  const shown = features.slice(0, MAX_FEATURE_ROWS);
  for (const [index, value] of shown.entries()) {
    const row = document.createElement("div");
    row.className = "feature-row";
    const width = (100 * (value - lo)) / (hi - lo);
    row.innerHTML =
      `<span class="feature-name">f${index}</span>` +
      `<span class="feature-bar"><span style="width:${width.toFixed(1)}%"></span></span>` +
      `<span class="feature-value">${value.toPrecision(4)}</span>`;
    container.appendChild(row);
  }
  if (features.length > shown.length) {
    const note = document.createElement("p");
    note.className = "feature-note";
    note.textContent = `… ${features.length - shown.length} more features`;
    container.appendChild(note);
  }
}

/** Leaf list with (N, n, uniformity) bars, largest leaves first. */
export function renderLeaves(container: HTMLElement, leaves: LeafView[]): void {
  container.innerHTML = "";
  const maxN = Math.max(...leaves.map((leaf) => leaf.N), 1);
  const ordered = [...leaves].sort((a, b) => b.N - a.N);
  for (const leaf of ordered) {
    const row = document.createElement("div");
    row.className = "leaf-row";
    row.dataset.leafId = String(leaf.id);
    const sizePct = ((100 * leaf.N) / maxN).toFixed(1);
    const uniformityPct = (100 * leaf.uniformity).toFixed(0);
    const majority =
      leaf.majority_class === null ? "–" : String(leaf.majority_class);
    row.innerHTML =
      `<span class="leaf-name">#${leaf.id}</span>` +
      `<span class="leaf-size-bar" title="${leaf.N} examples, ${leaf.n} labeled">` +
      `<span style="width:${sizePct}%"></span></span>` +
      `<span class="leaf-counts">${leaf.n}/${leaf.N}</span>` +
      `<span class="leaf-uniformity-bar" title="uniformity ${uniformityPct}%">` +
      `<span style="width:${uniformityPct}%"></span></span>` +
      `<span class="leaf-majority">${majority}</span>`;
    container.appendChild(row);
  }
}

/** Line chart of the total bound against the step index. */
export function drawBoundCurve(
  canvas: HTMLCanvasElement,
  curve: number[],
): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  if (curve.length === 0) {
    return;
  }
  const top = Math.max(...curve, 1);
  const pad = 6;
  const xAt = (i: number) =>
    curve.length === 1
      ? width / 2
      : pad + ((width - 2 * pad) * i) / (curve.length - 1);
  const yAt = (value: number) => height - pad - ((height - 2 * pad) * value) / top;
  ctx.strokeStyle = "#2563eb";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(xAt(0), yAt(curve[0]));
  for (let i = 1; i < curve.length; i++) {
    ctx.lineTo(xAt(i), yAt(curve[i]));
  }
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "10px sans-serif";
  ctx.fillText(top.toFixed(0), 4, 12);
}
