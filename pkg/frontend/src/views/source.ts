/**
 * Source view: numbered snippet around the instrumentation site of the
 * callsite hovered in the timeline.
 */

import type { SourceSnippet } from "../api";

export function renderSource(
  container: HTMLElement,
  snippet: SourceSnippet | null,
): void {
  container.textContent = "";
  if (snippet === null) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Hover a timeline point to see its source.";
    container.appendChild(empty);
    return;
  }
  const title = document.createElement("div");
  title.className = "source-title";
  title.textContent = `${snippet.file}:${snippet.line}`;
  container.appendChild(title);

  const pre = document.createElement("pre");
  pre.className = "source-snippet";
  for (const line of snippet.lines) {
    const row = document.createElement("div");
    row.className = line.line === snippet.line
      ? "src-line src-line-focus"
      : "src-line";
    row.dataset.line = String(line.line);
    const no = document.createElement("span");
    no.className = "src-no";
    no.textContent = String(line.line).padStart(5, " ");
    row.appendChild(no);
    row.appendChild(document.createTextNode(" " + line.text));
    pre.appendChild(row);
  }
  container.appendChild(pre);
}
