/**
 * Gantt view: one bar per invocation spanning its [counter_start,
 * counter_end] interval at a row given by call depth.  Interval overlap
 * encodes the caller/callee relation: a child paints strictly inside
 * its parent, one row further down.
 */

import type { GanttBar } from "../api";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 860;
const ROW_H = 26;
const PAD = { left: 46, right: 10, top: 8, bottom: 22 };

const PALETTE = ["#2f6db3", "#d95f02", "#1b9e77", "#7570b3", "#e7298a",
                 "#66a61e", "#a6761d", "#666666"];

function el(name: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) {
    node.setAttribute(k, String(v));
  }
  return node;
}

export function renderGantt(
  container: HTMLElement,
  bars: GanttBar[],
  onPick?: (bar: GanttBar) => void,
): void {
  container.textContent = "";
  if (bars.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No calls recorded.";
    container.appendChild(empty);
    return;
  }

  const cMin = Math.min(...bars.map((b) => b.counter_start));
  const cMax = Math.max(...bars.map((b) => b.counter_end));
  const maxDepth = Math.max(...bars.map((b) => b.depth));
  const height = PAD.top + (maxDepth + 1) * ROW_H + PAD.bottom;
  const span = Math.max(cMax - cMin, 1);
  const xOf = (c: number): number =>
    PAD.left + ((c - cMin) / span) * (WIDTH - PAD.left - PAD.right);

  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${height}`,
    width: WIDTH,
    height,
    class: "gantt-svg",
  });

  const colorByCallsite = new Map<string, string>();
  for (const bar of bars) {
    if (!colorByCallsite.has(bar.id)) {
      colorByCallsite.set(
        bar.id, PALETTE[colorByCallsite.size % PALETTE.length]);
    }
  }

  for (let d = 0; d <= maxDepth; d += 1) {
    const label = el("text", {
      x: PAD.left - 8,
      y: PAD.top + d * ROW_H + ROW_H * 0.65,
      class: "tick",
      "text-anchor": "end",
    });
    label.textContent = `d${d}`;
    svg.appendChild(label);
  }

  for (const bar of bars) {
    const x = xOf(bar.counter_start);
    const w = Math.max(xOf(bar.counter_end) - x, 2);
    const rect = el("rect", {
      x,
      y: PAD.top + bar.depth * ROW_H + 3,
      width: w,
      height: ROW_H - 6,
      rx: 2,
      fill: colorByCallsite.get(bar.id) as string,
      class: "bar",
      "data-callsite": bar.id,
      "data-invocation": bar.invocation,
      "data-start": bar.counter_start,
      "data-end": bar.counter_end,
      "data-depth": bar.depth,
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent =
      `${bar.module}.${bar.function} #${bar.invocation} ` +
      `[${bar.counter_start}, ${bar.counter_end}] depth ${bar.depth}`;
    rect.appendChild(title);
    if (onPick) {
      rect.addEventListener("click", () => onPick(bar));
    }
    svg.appendChild(rect);
  }

  container.appendChild(svg);
}
