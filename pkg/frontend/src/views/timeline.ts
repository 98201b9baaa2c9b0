/**
 * Timeline view: the active statistic per invocation for every selected
 * callsite.  Inputs draw as upward triangles, outputs as downward
 * triangles; multiple value slots of one callsite overlay as separate
 * series with a shared legend.
 */

import type { Timeline } from "../api";
import type { HoverTarget, ZoomTarget } from "../state";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 860;
const HEIGHT = 300;
const PAD = { left: 46, right: 10, top: 14, bottom: 26 };

const PALETTE = ["#2f6db3", "#d95f02", "#1b9e77", "#7570b3", "#e7298a",
                 "#66a61e", "#a6761d", "#666666"];

export interface TimelineCallbacks {
  onHover?: (target: HoverTarget | null) => void;
  onPick?: (target: ZoomTarget) => void;
}

function el(name: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) {
    node.setAttribute(k, String(v));
  }
  return node;
}

/** Marker polygon: apex up for inputs, apex down for outputs. */
function trianglePoints(x: number, y: number, up: boolean, r = 4.5): string {
  return up
    ? `${x},${y - r} ${x - r},${y + r} ${x + r},${y + r}`
    : `${x},${y + r} ${x - r},${y - r} ${x + r},${y - r}`;
}

export function renderTimeline(
  container: HTMLElement,
  timelines: Timeline[],
  cap: number,
  callbacks: TimelineCallbacks = {},
): void {
  container.textContent = "";
  if (timelines.length === 0 ||
      timelines.every((t) => t.series.length === 0)) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Select one or more functions to plot their timeline.";
    container.appendChild(empty);
    return;
  }

  const counters: number[] = [];
  const values: number[] = [];
  for (const tl of timelines) {
    for (const s of tl.series) {
      for (const pt of s.points) {
        counters.push(pt.counter);
        if (pt.value !== null) values.push(pt.value);
      }
    }
  }
  const cMin = Math.min(...counters);
  const cMax = Math.max(...counters);
  const vMax = Math.max(cap, ...values, 1);
  const vMin = Math.min(0, ...values);
  const xOf = (c: number): number =>
    cMax === cMin
      ? (PAD.left + WIDTH - PAD.right) / 2
      : PAD.left + ((c - cMin) / (cMax - cMin)) * (WIDTH - PAD.left - PAD.right);
  const yOf = (v: number): number =>
    HEIGHT - PAD.bottom -
    ((v - vMin) / (vMax - vMin)) * (HEIGHT - PAD.top - PAD.bottom);

  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
    class: "timeline-svg",
  });

  // axes and the precision cap line
  svg.appendChild(el("line", {
    x1: PAD.left, y1: yOf(vMin), x2: WIDTH - PAD.right, y2: yOf(vMin),
    class: "axis",
  }));
  svg.appendChild(el("line", {
    x1: PAD.left, y1: PAD.top, x2: PAD.left, y2: HEIGHT - PAD.bottom,
    class: "axis",
  }));
  const capLine = el("line", {
    x1: PAD.left, y1: yOf(cap), x2: WIDTH - PAD.right, y2: yOf(cap),
    class: "cap-line", "stroke-dasharray": "4 3",
  });
  svg.appendChild(capLine);
  for (const tick of [vMin, cap / 2, cap]) {
    const label = el("text", {
      x: PAD.left - 6, y: yOf(tick) + 4, class: "tick", "text-anchor": "end",
    });
    label.textContent = String(Math.round(tick));
    svg.appendChild(label);
  }

  const legend = document.createElement("div");
  legend.className = "legend";

  let colorIdx = 0;
  for (const tl of timelines) {
    for (const series of tl.series) {
      const color = PALETTE[colorIdx % PALETTE.length];
      colorIdx += 1;
      const label = `${tl.module}.${tl.function}` +
        (series.path ? `/${series.path}` : "") + ` (${series.direction})`;

      const drawable = series.points.filter((p) => p.value !== null);
      if (drawable.length > 1) {
        const d = drawable
          .map((p, i) => `${i ? "L" : "M"}${xOf(p.counter)},${yOf(p.value as number)}`)
          .join(" ");
        svg.appendChild(el("path", {
          d, fill: "none", stroke: color, "stroke-width": 1,
          class: "series-line", opacity: 0.45,
        }));
      }
      for (const pt of series.points) {
        if (pt.value === null) continue;
        const up = series.direction === "in";
        const marker = el("polygon", {
          points: trianglePoints(xOf(pt.counter), yOf(pt.value), up),
          fill: color,
          class: `pt pt-${series.direction}`,
          "data-callsite": tl.id,
          "data-invocation": pt.invocation,
          "data-direction": series.direction,
          "data-path": series.path,
          "data-counter": pt.counter,
          "data-value": pt.value,
        });
        marker.addEventListener("mouseenter", () => {
          callbacks.onHover?.({
            callsiteId: tl.id,
            invocation: pt.invocation,
            direction: series.direction,
            path: series.path,
            counter: pt.counter,
            value: pt.value,
          });
        });
        marker.addEventListener("click", () => {
          callbacks.onPick?.({
            callsiteId: tl.id,
            invocation: pt.invocation,
            direction: series.direction,
            path: series.path,
          });
        });
        svg.appendChild(marker);
      }

      const item = document.createElement("span");
      item.className = "legend-item";
      const swatch = document.createElement("span");
      swatch.className = "swatch";
      swatch.style.background = color;
      item.appendChild(swatch);
      item.appendChild(document.createTextNode(label));
      legend.appendChild(item);
    }
  }

  container.appendChild(svg);
  container.appendChild(legend);
}
