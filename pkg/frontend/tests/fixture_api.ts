/**
 * ApiClient backed by canned responses captured from the real summary
 * server.  Records every slot/source request so tests can assert the
 * round-trip contract (a picked timeline point is fetched verbatim).
 */

import type {
  ApiClient,
  CallsiteSummary,
  Direction,
  GanttBar,
  Meta,
  SlotData,
  SourceSnippet,
  Stat,
  Timeline,
} from "../src/api";

export interface SummaryFixture {
  meta: Meta;
  callsites: CallsiteSummary[];
  gantt: GanttBar[];
  timelines: Record<string, Timeline>;
}

export interface SlotRequest {
  id: string;
  invocation: number;
  path: string;
  dir: Direction;
  stat: Stat;
}

export class FixtureApi implements ApiClient {
  slotRequests: SlotRequest[] = [];
  sourceRequests: { file: string; line: number }[] = [];

  constructor(
    private fixture: SummaryFixture,
    private slots: Record<string, SlotData> = {},
    private snippet: SourceSnippet | null = null,
  ) {}

  meta(): Promise<Meta> {
    return Promise.resolve(this.fixture.meta);
  }

  callsites(): Promise<CallsiteSummary[]> {
    return Promise.resolve(this.fixture.callsites);
  }

  timeline(id: string, _stat: Stat): Promise<Timeline> {
    const tl = this.fixture.timelines[id];
    if (!tl) return Promise.reject(new Error(`no timeline fixture ${id}`));
    return Promise.resolve(tl);
  }

  gantt(): Promise<GanttBar[]> {
    return Promise.resolve(this.fixture.gantt);
  }

  slot(
    id: string,
    invocation: number,
    path: string,
    dir: Direction,
    stat: Stat,
  ): Promise<SlotData> {
    this.slotRequests.push({ id, invocation, path, dir, stat });
    const key = `${id}/${invocation}/${path}/${dir}`;
    const hit = this.slots[key];
    if (!hit) return Promise.reject(new Error(`no slot fixture ${key}`));
    return Promise.resolve(hit);
  }

  source(file: string, line: number): Promise<SourceSnippet> {
    this.sourceRequests.push({ file, line });
    if (!this.snippet) {
      return Promise.reject(new Error("no source fixture"));
    }
    return Promise.resolve(this.snippet);
  }
}
