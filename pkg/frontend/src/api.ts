/**
 * Typed client for the profiler's read-only summary API.
 * All views consume data exclusively through this interface, so tests
 * can swap in a fixture-backed implementation.
 */

export type Stat = "sigbits" | "mean" | "std";
export type Direction = "in" | "out";

export interface Frame {
  file: string;
  line: number;
  fn: string;
}

export interface Meta {
  kernel: string;
  params: Record<string, unknown>;
  mode: string;
  t64: number;
  t32: number;
  seed: number | null;
  n_runs: number;
  chosen_runs: number[];
  groups: { digest: string; runs: number[]; size: number }[];
  divergence: { run_index: number; first_divergence_event: number }[];
  uninformative: boolean;
}

export interface CallsiteSummary {
  id: string;
  module: string;
  function: string;
  invocations: number;
  rollup_sigbits: number | null;
  backtrace: Frame[];
}

export interface TimelinePoint {
  invocation: number;
  counter: number;
  value: number | null;
}

export interface TimelineSeries {
  path: string;
  direction: Direction;
  points: TimelinePoint[];
}

export interface Timeline {
  id: string;
  module: string;
  function: string;
  stat: Stat;
  series: TimelineSeries[];
}

export interface GanttBar {
  id: string;
  module: string;
  function: string;
  invocation: number;
  counter_start: number;
  counter_end: number;
  depth: number;
}

export interface SlotData {
  id: string;
  invocation: number;
  path: string;
  direction: string;
  stat: Stat;
  dtype: string;
  shape: number[];
  data: (number | null)[];
  inf_norm: number | null;
  cap: number;
}

export interface SourceLine {
  line: number;
  text: string;
}

export interface SourceSnippet {
  file: string;
  line: number;
  lines: SourceLine[];
}

export interface ApiClient {
  meta(): Promise<Meta>;
  callsites(): Promise<CallsiteSummary[]>;
  timeline(id: string, stat: Stat): Promise<Timeline>;
  gantt(): Promise<GanttBar[]>;
  slot(
    id: string,
    invocation: number,
    path: string,
    dir: Direction,
    stat: Stat,
  ): Promise<SlotData>;
  source(file: string, line: number, radius?: number): Promise<SourceSnippet>;
}

/** Fetch-based client; base URL is configurable (default same origin). */
export class HttpApi implements ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const body = (await resp.json()) as { error?: string };
        if (body.error) detail = `${resp.status}: ${body.error}`;
      } catch {
        /* non-JSON error body */
      }
      throw new Error(`GET ${path} failed (${detail})`);
    }
    return (await resp.json()) as T;
  }

  meta(): Promise<Meta> {
    return this.get("/api/meta");
  }

  callsites(): Promise<CallsiteSummary[]> {
    return this.get("/api/callsites");
  }

  timeline(id: string, stat: Stat): Promise<Timeline> {
    return this.get(
      `/api/callsite/${encodeURIComponent(id)}/timeline?stat=${stat}`,
    );
  }

  gantt(): Promise<GanttBar[]> {
    return this.get("/api/gantt");
  }

  slot(
    id: string,
    invocation: number,
    path: string,
    dir: Direction,
    stat: Stat,
  ): Promise<SlotData> {
    const q = new URLSearchParams({ path, dir, stat });
    return this.get(
      `/api/callsite/${encodeURIComponent(id)}/invocation/${invocation}` +
        `/slot?${q.toString()}`,
    );
  }

  source(file: string, line: number, radius = 15): Promise<SourceSnippet> {
    const q = new URLSearchParams({
      file,
      line: String(line),
      radius: String(radius),
    });
    return this.get(`/api/source?${q.toString()}`);
  }
}
