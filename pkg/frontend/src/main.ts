/**
 * Application wiring: fetch everything through the API client, hold
 * shared state, and re-render the five views on change.  The UI derives
 * no statistics of its own.
 */

import { HttpApi } from "./api";
import type { ApiClient, CallsiteSummary, Meta, Stat, Timeline } from "./api";
import { ViewState } from "./state";
import { renderFunctionList } from "./views/funclist";
import { renderGantt } from "./views/gantt";
import { renderSource } from "./views/source";
import { renderTimeline } from "./views/timeline";
import { renderZoom } from "./views/zoom";

interface Panels {
  meta: HTMLElement;
  funcs: HTMLElement;
  timeline: HTMLElement;
  gantt: HTMLElement;
  zoom: HTMLElement;
  source: HTMLElement;
  statPicker: HTMLSelectElement;
}

export class App {
  private sites: CallsiteSummary[] = [];
  private meta: Meta | null = null;
  readonly state = new ViewState();

  constructor(private api: ApiClient, private panels: Panels) {}

  async start(): Promise<void> {
    this.meta = await this.api.meta();
    this.sites = await this.api.callsites();
    this.state.setKnownIds(this.sites.map((s) => s.id));
    this.renderMeta();
    renderFunctionList(this.panels.funcs, this.sites, this.state);
    renderGantt(this.panels.gantt, await this.api.gantt(), (bar) => {
      if (!this.state.selected.has(bar.id)) {
        this.state.toggleSelected(bar.id);
      }
    });
    this.panels.statPicker.addEventListener("change", () => {
      this.state.setStat(this.panels.statPicker.value as Stat);
    });
    this.state.subscribe(() => {
      void this.refresh();
    });
    await this.refresh();
  }

  private renderMeta(): void {
    if (!this.meta) return;
    const m = this.meta;
    const merged = `${m.chosen_runs.length}/${m.n_runs}`;
    this.panels.meta.textContent =
      `${m.kernel} | mode ${m.mode} | t64=${m.t64} t32=${m.t32} | ` +
      `runs merged ${merged}` +
      (m.uninformative ? " (single run: statistics uninformative)" : "");
  }

  private async refresh(): Promise<void> {
    const cap = this.meta?.t64 ?? 53;
    const timelines: Timeline[] = [];
    for (const id of [...this.state.selected].sort()) {
      timelines.push(await this.api.timeline(id, this.state.activeStat));
    }
    renderTimeline(this.panels.timeline, timelines, cap, {
      onHover: (target) => {
        this.state.setHover(target);
        if (target) {
          const site = this.sites.find((s) => s.id === target.callsiteId);
          const frame = site?.backtrace[0];
          if (frame) {
            void this.api.source(frame.file, frame.line).then((snippet) => {
              renderSource(this.panels.source, snippet);
            });
          }
        }
      },
      onPick: (target) => this.state.setZoom(target),
    });

    const zoom = this.state.zoomTarget;
    if (zoom) {
      const slot = await this.api.slot(
        zoom.callsiteId, zoom.invocation, zoom.path, zoom.direction,
        this.state.activeStat);
      renderZoom(this.panels.zoom, slot);
    } else {
      renderZoom(this.panels.zoom, null);
    }
  }
}

export function bootstrap(): void {
  const byId = (id: string): HTMLElement => {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  };
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8764";
  const app = new App(new HttpApi(base), {
    meta: byId("meta"),
    funcs: byId("functions"),
    timeline: byId("timeline"),
    gantt: byId("gantt"),
    zoom: byId("zoom"),
    source: byId("source"),
    statPicker: byId("stat-picker") as HTMLSelectElement,
  });
  void app.start();
}
