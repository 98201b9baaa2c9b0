import { beforeEach, describe, expect, it } from "vitest";

import type { Timeline } from "../src/api";
import type { HoverTarget, ZoomTarget } from "../src/state";
import { renderTimeline } from "../src/views/timeline";
import arange from "./fixtures/arange.json";

const CAP = 53;

function polygonApexIsUp(points: string): boolean {
  // points = "x0,y0 x1,y1 x2,y2"; the lone vertex is the apex
  const ys = points.split(" ").map((p) => Number(p.split(",")[1]));
  const [apexY, baseY1, baseY2] = ys;
  expect(baseY1).toBe(baseY2);
  return apexY < baseY1; // SVG y grows downward
}

function yOfMarker(points: string): number {
  const ys = points.split(" ").map((p) => Number(p.split(",")[1]));
  return (Math.min(...ys) + Math.max(...ys)) / 2;
}

describe("timeline view", () => {
  let host: HTMLElement;
  beforeEach(() => {
    host = document.createElement("div");
    document.body.appendChild(host);
  });

  const allTimelines = (): Timeline[] =>
    Object.values(arange.timelines) as unknown as Timeline[];

  it("renders inputs as upward and outputs as downward triangles", () => {
    renderTimeline(host, allTimelines(), CAP);
    const ins = [...host.querySelectorAll("polygon.pt-in")];
    const outs = [...host.querySelectorAll("polygon.pt-out")];
    expect(ins.length).toBeGreaterThan(0);
    expect(outs.length).toBeGreaterThan(0);
    for (const marker of ins) {
      expect(polygonApexIsUp(marker.getAttribute("points")!)).toBe(true);
    }
    for (const marker of outs) {
      expect(polygonApexIsUp(marker.getAttribute("points")!)).toBe(false);
    }
  });

  it("plots the exact arange run as a flat line at 53 bits", () => {
    renderTimeline(host, allTimelines(), CAP);
    const markers = [...host.querySelectorAll("polygon.pt")];
    expect(markers.length).toBeGreaterThan(4);
    for (const marker of markers) {
      expect(Number(marker.getAttribute("data-value"))).toBe(53);
    }
    const ys = new Set(markers.map((m) => yOfMarker(m.getAttribute("points")!)));
    expect(ys.size).toBe(1); // one horizontal level: y(53)
    // and that level is the rendered cap line
    const capLine = host.querySelector("line.cap-line")!;
    expect(Number(capLine.getAttribute("y1"))).toBeCloseTo([...ys][0], 5);
  });

  it("shows an empty-state prompt when nothing is selected", () => {
    renderTimeline(host, [], CAP);
    expect(host.querySelector(".empty-state")?.textContent).toMatch(/select/i);
    expect(host.querySelector("svg")).toBeNull();
  });

  it("reports hover and pick targets with full point identity", () => {
    const hovers: (HoverTarget | null)[] = [];
    const picks: ZoomTarget[] = [];
    renderTimeline(host, allTimelines(), CAP, {
      onHover: (t) => hovers.push(t),
      onPick: (t) => picks.push(t),
    });
    const marker = host.querySelector("polygon.pt-out")!;
    marker.dispatchEvent(new Event("mouseenter"));
    marker.dispatchEvent(new Event("click"));
    expect(hovers.length).toBe(1);
    expect(picks.length).toBe(1);
    expect(picks[0].callsiteId).toBe(marker.getAttribute("data-callsite"));
    expect(String(picks[0].invocation)).toBe(
      marker.getAttribute("data-invocation"));
    expect(picks[0].path).toBe(marker.getAttribute("data-path"));
    expect(picks[0].direction).toBe("out");
  });

  it("overlays one legend entry per slot series", () => {
    renderTimeline(host, allTimelines(), CAP);
    const legendItems = host.querySelectorAll(".legend-item");
    const seriesCount = allTimelines()
      .reduce((acc, tl) => acc + tl.series.length, 0);
    expect(legendItems.length).toBe(seriesCount);
  });
});
