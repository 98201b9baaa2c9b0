/**
 * Function list view: checkbox per callsite with a significant-bits
 * badge; the checked set drives the timeline.
 */

import type { CallsiteSummary } from "../api";
import type { ViewState } from "../state";

export function renderFunctionList(
  container: HTMLElement,
  sites: CallsiteSummary[],
  state: ViewState,
): void {
  container.textContent = "";
  const list = document.createElement("ul");
  list.className = "func-list";
  for (const site of sites) {
    const item = document.createElement("li");
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = site.id;
    box.checked = state.selected.has(site.id);
    box.addEventListener("change", () => state.toggleSelected(site.id));
    label.appendChild(box);
    const name = document.createElement("span");
    name.className = "func-name";
    name.textContent = `${site.module}.${site.function}`;
    label.appendChild(name);
    const badge = document.createElement("span");
    badge.className = "badge";
    badge.textContent = site.rollup_sigbits === null
      ? "-"
      : `${site.rollup_sigbits.toFixed(1)}b`;
    label.appendChild(badge);
    const count = document.createElement("span");
    count.className = "call-count";
    count.textContent = `${site.invocations}x`;
    label.appendChild(count);
    item.appendChild(label);
    list.appendChild(item);
  }
  container.appendChild(list);
}
