/**
 * Zoom view: per-element heatmap of one non-scalar slot.  1-D arrays
 * render as a single row, rank-3+ arrays show their first 2-D slice
 * behind an index selector.  The sigbits color scale is pinned to
 * [0, cap] so heatmaps compare across kernels.
 */

import type { SlotData } from "../api";

function colorFor(value: number | null, lo: number, hi: number): string {
  if (value === null || Number.isNaN(value)) return "#bbbbbb";
  const t = Math.min(Math.max((value - lo) / (hi - lo || 1), 0), 1);
  // dark violet (low bits) -> pale yellow (full precision)
  const r = Math.round(60 + 195 * t);
  const g = Math.round(20 + 215 * t);
  const b = Math.round(90 + 80 * (1 - t));
  return `rgb(${r},${g},${b})`;
}

function sliceOf(slot: SlotData, slice: number): {
  rows: number; cols: number; data: (number | null)[];
} {
  const shape = slot.shape;
  if (shape.length === 1) {
    return { rows: 1, cols: shape[0], data: slot.data };
  }
  if (shape.length === 2) {
    return { rows: shape[0], cols: shape[1], data: slot.data };
  }
  const rows = shape[shape.length - 2];
  const cols = shape[shape.length - 1];
  const page = rows * cols;
  return {
    rows,
    cols,
    data: slot.data.slice(slice * page, (slice + 1) * page),
  };
}

export function renderZoom(container: HTMLElement, slot: SlotData | null,
                           slice = 0): void {
  container.textContent = "";
  if (slot === null) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Pick a timeline point to inspect its array.";
    container.appendChild(empty);
    return;
  }
  if (slot.shape.length === 0) {
    const msg = document.createElement("p");
    msg.className = "empty-state zoom-disabled";
    msg.title = "scalar values have no elementwise structure to zoom into";
    msg.textContent =
      `"${slot.path || "value"}" is a scalar; zoom is disabled.`;
    container.appendChild(msg);
    return;
  }

  const header = document.createElement("div");
  header.className = "zoom-header";
  header.textContent =
    `${slot.path || "value"} (${slot.direction}) - ${slot.stat}`;
  container.appendChild(header);

  if (slot.shape.length > 2) {
    const pages = slot.shape.slice(0, -2).reduce((a, b) => a * b, 1);
    const select = document.createElement("select");
    select.className = "slice-select";
    for (let i = 0; i < pages; i += 1) {
      const opt = document.createElement("option");
      opt.value = String(i);
      opt.textContent = `slice ${i}`;
      if (i === slice) opt.selected = true;
      select.appendChild(opt);
    }
    select.addEventListener("change", () => {
      renderZoom(container, slot, Number(select.value));
    });
    container.appendChild(select);
  }

  const { rows, cols, data } = sliceOf(slot, slice);
  const lo = 0;
  const hi = slot.stat === "sigbits"
    ? slot.cap
    : Math.max(...data.filter((v): v is number => v !== null), 1);

  const grid = document.createElement("div");
  grid.className = "heatmap";
  grid.style.display = "grid";
  grid.style.gridTemplateColumns = `repeat(${cols}, 1fr)`;
  for (let r = 0; r < rows; r += 1) {
    for (let c = 0; c < cols; c += 1) {
      const v = data[r * cols + c];
      const cell = document.createElement("div");
      cell.className = "cell";
      cell.dataset.row = String(r);
      cell.dataset.col = String(c);
      cell.dataset.value = v === null ? "" : String(v);
      cell.style.background = colorFor(v, lo, hi);
      cell.title = `[${r}, ${c}] = ${v === null ? "n/a" : v.toFixed(2)}`;
      grid.appendChild(cell);
    }
  }
  container.appendChild(grid);

  const panel = document.createElement("dl");
  panel.className = "zoom-metrics";
  const entries: [string, string][] = [
    ["shape", `[${slot.shape.join(", ")}]`],
    ["infinity norm", slot.inf_norm === null ? "n/a"
                      : slot.inf_norm.toPrecision(6)],
    ["dtype", slot.dtype],
    ["cap", String(slot.cap)],
  ];
  for (const [k, v] of entries) {
    const dt = document.createElement("dt");
    dt.textContent = k;
    const dd = document.createElement("dd");
    dd.textContent = v;
    panel.appendChild(dt);
    panel.appendChild(dd);
  }
  container.appendChild(panel);
}
