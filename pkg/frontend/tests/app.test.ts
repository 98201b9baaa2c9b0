import { beforeEach, describe, expect, it } from "vitest";

import type { SlotData, SourceSnippet } from "../src/api";
import { App } from "../src/main";
import { ViewState } from "../src/state";
import { renderFunctionList } from "../src/views/funclist";
import { FixtureApi, type SummaryFixture } from "./fixture_api";
import arange from "./fixtures/arange.json";
import branch from "./fixtures/branch.json";
import scoreSlot from "./fixtures/branch_score_slot.json";
import snippet from "./fixtures/source_snippet.json";

function panels() {
  document.body.innerHTML = `
    <div id="meta"></div><div id="functions"></div>
    <div id="timeline"></div><div id="gantt"></div>
    <div id="zoom"></div><div id="source"></div>
    <select id="stat-picker"><option value="sigbits">s</option>
    <option value="mean">m</option><option value="std">d</option></select>`;
  const byId = (id: string) => document.getElementById(id) as HTMLElement;
  return {
    meta: byId("meta"),
    funcs: byId("functions"),
    timeline: byId("timeline"),
    gantt: byId("gantt"),
    zoom: byId("zoom"),
    source: byId("source"),
    statPicker: byId("stat-picker") as HTMLSelectElement,
  };
}

const tick = () => new Promise((resolve) => setTimeout(resolve, 0));

describe("view state", () => {
  it("holds exactly one active statistic", () => {
    const state = new ViewState(new Set(["0"]));
    expect(state.activeStat).toBe("sigbits");
    state.setStat("mean");
    expect(state.activeStat).toBe("mean");
    expect(() => state.setStat("median" as never)).toThrow();
  });

  it("rejects hover/zoom targets for unknown callsites", () => {
    const state = new ViewState(new Set(["0"]));
    expect(() => state.setZoom({
      callsiteId: "99", invocation: 0, direction: "out", path: "",
    })).toThrow(/unknown/);
    expect(() => state.toggleSelected("42")).toThrow(/unknown/);
  });

  it("prunes selections when the known set shrinks", () => {
    const state = new ViewState(new Set(["0", "1"]));
    state.toggleSelected("1");
    state.setKnownIds(["0"]);
    expect(state.selected.size).toBe(0);
  });
});

describe("function list", () => {
  it("renders a checkbox with badge per callsite and drives selection", () => {
    const host = document.createElement("div");
    const state = new ViewState(
      new Set(arange.callsites.map((c) => c.id)));
    renderFunctionList(host, arange.callsites as never, state);
    const boxes = host.querySelectorAll("input[type=checkbox]");
    expect(boxes.length).toBe(arange.callsites.length);
    expect(host.querySelectorAll(".badge").length).toBe(boxes.length);
    (boxes[0] as HTMLInputElement).dispatchEvent(new Event("change"));
    expect(state.selected.has(arange.callsites[0].id)).toBe(true);
  });
});

describe("app wiring", () => {
  let api: FixtureApi;

  beforeEach(() => {
    const scoreSite = (branch.callsites as { id: string; function: string }[])
      .find((c) => c.function === "score_grid")!;
    api = new FixtureApi(
      branch as unknown as SummaryFixture,
      { [`${scoreSite.id}/0/score/out`]: scoreSlot as unknown as SlotData },
      snippet as SourceSnippet,
    );
  });

  it("round-trips a picked timeline point into the exact slot request", async () => {
    const app = new App(api, panels());
    await app.start();
    const scoreSite = (branch.callsites as { id: string; function: string }[])
      .find((c) => c.function === "score_grid")!;
    app.state.toggleSelected(scoreSite.id);
    await tick();

    const marker = document.querySelector(
      `polygon.pt-out[data-callsite="${scoreSite.id}"][data-path="score"]`)!;
    expect(marker).not.toBeNull();
    marker.dispatchEvent(new Event("click"));
    await tick();

    expect(api.slotRequests.length).toBeGreaterThan(0);
    const req = api.slotRequests[api.slotRequests.length - 1];
    expect(req.id).toBe(scoreSite.id);
    expect(req.invocation).toBe(
      Number(marker.getAttribute("data-invocation")));
    expect(req.path).toBe("score");
    expect(req.dir).toBe("out");
    expect(document.querySelectorAll("#zoom .heatmap .cell").length)
      .toBe(24 * 24);
  });

  it("hovering a point loads the callsite's source snippet", async () => {
    const app = new App(api, panels());
    await app.start();
    const site = (branch.callsites as { id: string; function: string }[])
      .find((c) => c.function === "classify_grid")!;
    app.state.toggleSelected(site.id);
    await tick();
    const marker = document.querySelector(
      `polygon.pt[data-callsite="${site.id}"]`)!;
    marker.dispatchEvent(new Event("mouseenter"));
    await tick();
    expect(api.sourceRequests.length).toBe(1);
    expect(api.sourceRequests[0].file).toBe("kernels/hyperplane.py");
    const focus = document.querySelector("#source .src-line-focus");
    expect(focus).not.toBeNull();
  });

  it("shows run-set metadata including the merge count", async () => {
    const app = new App(api, panels());
    await app.start();
    const text = (document.getElementById("meta") as HTMLElement).textContent!;
    expect(text).toContain("unstable_branch");
    expect(text).toContain("8/8");
  });
});
