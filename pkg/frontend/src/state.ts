/**
 * Shared view state: which callsites are plotted, the active statistic,
 * the hovered timeline point, and the zoom target.  Targets are
 * validated against the known callsite ids so stale references cannot
 * survive a reload.
 */

import type { Direction, Stat } from "./api";

export interface HoverTarget {
  callsiteId: string;
  invocation: number;
  direction: Direction;
  path: string;
  counter: number;
  value: number | null;
}

export interface ZoomTarget {
  callsiteId: string;
  invocation: number;
  direction: Direction;
  path: string;
}

const STATS: Stat[] = ["sigbits", "mean", "std"];

export class ViewState {
  readonly selected = new Set<string>();
  private stat: Stat = "sigbits";
  private hover: HoverTarget | null = null;
  private zoom: ZoomTarget | null = null;
  private listeners: Array<() => void> = [];

  constructor(private knownIds: Set<string> = new Set()) {}

  setKnownIds(ids: Iterable<string>): void {
    this.knownIds = new Set(ids);
    for (const id of [...this.selected]) {
      if (!this.knownIds.has(id)) this.selected.delete(id);
    }
  }

  get activeStat(): Stat {
    return this.stat;
  }

  get hovered(): HoverTarget | null {
    return this.hover;
  }

  get zoomTarget(): ZoomTarget | null {
    return this.zoom;
  }

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  private require(id: string): void {
    if (!this.knownIds.has(id)) {
      throw new Error(`unknown callsite id ${id}`);
    }
  }

  toggleSelected(id: string): void {
    this.require(id);
    if (this.selected.has(id)) {
      this.selected.delete(id);
    } else {
      this.selected.add(id);
    }
    this.emit();
  }

  setStat(stat: Stat): void {
    if (!STATS.includes(stat)) {
      throw new Error(`unknown statistic ${stat}`);
    }
    this.stat = stat;
    this.emit();
  }

  setHover(target: HoverTarget | null): void {
    if (target) this.require(target.callsiteId);
    this.hover = target;
    this.emit();
  }

  setZoom(target: ZoomTarget | null): void {
    if (target) this.require(target.callsiteId);
    this.zoom = target;
    this.emit();
  }
}
