"""Text report, CSV export, and figure rendering over a summary document."""

from __future__ import annotations

import csv
import os

__all__ = ["callsite_rows", "divergence_status", "render_report",
           "write_csv", "render_figures"]


def divergence_status(meta: dict) -> tuple[str, str]:
    """(glyph, merged) like ("partial", "3/5")."""
    chosen = len(meta.get("chosen_runs", []))
    total = meta.get("n_runs", chosen)
    if meta.get("uninformative") or chosen <= 1 < total:
        glyph = "failed"
    elif chosen < total:
        glyph = "partial"
    else:
        glyph = "ok"
    return glyph, f"{chosen}/{total}"


def _output_rollups(site: dict) -> list[float]:
    return [slot["rollup_sigbits"]
            for inv in site["invocations"] for slot in inv["outputs"]]


def _output_min(site: dict) -> float | None:
    vals = [s for inv in site["invocations"] for slot in inv["outputs"]
            for s in slot["sigbits"]]
    return min(vals) if vals else None


def callsite_rows(doc: dict) -> list[dict]:
    glyph, merged = divergence_status(doc["meta"])
    rows = []
    for site in doc["callsites"]:
        rollups = _output_rollups(site)
        mins = _output_min(site)
        rows.append({
            "id": site["id"],
            "function": f"{site['module']}.{site['function']}",
            "invocations": len(site["invocations"]),
            "mean_output_sigbits":
                sum(rollups) / len(rollups) if rollups else None,
            "min_output_sigbits": mins,
            "status": glyph,
            "merged": merged,
        })
    return rows


def _fmt(v) -> str:
    return "-" if v is None else f"{v:.2f}"


def render_report(doc: dict) -> str:
    meta = doc["meta"]
    glyph, merged = divergence_status(meta)
    lines = [
        f"kernel: {meta['kernel']}  mode: {meta['mode']}  "
        f"t64: {meta['t64']}  t32: {meta['t32']}  "
        f"runs merged: {merged} [{glyph}]",
    ]
    for out in meta.get("divergence", []):
        lines.append(
            f"  divergent run {out['run_index']}: first differing event "
            f"{out['first_divergence_event']}")
    rows = callsite_rows(doc)
    if not rows:
        lines.append("no instrumented calls")
        return "\n".join(lines) + "\n"
    header = f"{'function':<34} {'calls':>5} {'mean(s)':>8} {'min(s)':>8} status"
    lines.append(header)
    lines.append("-" * len(header))
    for r in rows:
        lines.append(
            f"{r['function']:<34} {r['invocations']:>5} "
            f"{_fmt(r['mean_output_sigbits']):>8} "
            f"{_fmt(r['min_output_sigbits']):>8} "
            f"{r['status']} ({r['merged']})")
    return "\n".join(lines) + "\n"


def write_csv(doc: dict, path: str) -> None:
    rows = callsite_rows(doc)
    fields = ["id", "function", "invocations", "mean_output_sigbits",
              "min_output_sigbits", "status", "merged"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


# -- figures -------------------------------------------------------------------

def _timeline_figure(doc: dict, path: str) -> None:
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(9, 5))
    cmap = plt.get_cmap("tab10")
    for i, site in enumerate(doc["callsites"]):
        color = cmap(i % 10)
        label = f"{site['module']}.{site['function']}"
        xs_in, ys_in, xs_out, ys_out = [], [], [], []
        for inv in site["invocations"]:
            for slot in inv["inputs"]:
                xs_in.append(inv["counter_start"])
                ys_in.append(slot["rollup_sigbits"])
            for slot in inv["outputs"]:
                xs_out.append(inv["counter_end"])
                ys_out.append(slot["rollup_sigbits"])
        if xs_in:
            ax.scatter(xs_in, ys_in, marker="^", s=22, color=color,
                       label=f"{label} (in)")
        if xs_out:
            ax.scatter(xs_out, ys_out, marker="v", s=22, color=color,
                       label=f"{label} (out)")
    cap = float(doc["meta"]["t64"])
    ax.set_xlabel("event counter")
    ax.set_ylabel("significant bits (rollup)")
    ax.set_ylim(-1, cap + 2)
    ax.set_title(f"{doc['meta']['kernel']} [{doc['meta']['mode']}]")
    ax.legend(fontsize=7, loc="lower right", ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _gantt_figure(doc: dict, path: str) -> None:
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(9, 4))
    cmap = plt.get_cmap("tab10")
    seen = set()
    for i, site in enumerate(doc["callsites"]):
        color = cmap(i % 10)
        label = f"{site['module']}.{site['function']}"
        for inv in site["invocations"]:
            width = max(inv["counter_end"] - inv["counter_start"], 0.4)
            ax.broken_barh([(inv["counter_start"], width)],
                           (inv["depth"] - 0.35, 0.7),
                           facecolors=color, edgecolor="black",
                           linewidth=0.3,
                           label=None if label in seen else label)
            seen.add(label)
    ax.set_xlabel("event counter")
    ax.set_ylabel("call depth")
    ax.invert_yaxis()
    ax.set_title("call intervals")
    ax.legend(fontsize=7, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _heatmap_figure(doc: dict, path: str) -> bool:
    import numpy as np
    import matplotlib.pyplot as plt

    best = None
    for site in doc["callsites"]:
        for inv in site["invocations"]:
            for slot in inv["outputs"]:
                size = 1
                for s in slot["shape"]:
                    size *= s
                if slot["shape"] and (best is None or size > best[0]):
                    best = (size, site, inv, slot)
    if best is None:
        return False
    _, site, inv, slot = best
    data = np.asarray(slot["sigbits"], dtype=float)
    shape = slot["shape"]
    grid = data.reshape(shape) if len(shape) == 2 else data.reshape(1, -1)
    fig, ax = plt.subplots(figsize=(7, 5))
    im = ax.imshow(grid, aspect="auto", origin="lower",
                   vmin=0.0, vmax=float(doc["meta"]["t64"]),
                   cmap="viridis")
    fig.colorbar(im, ax=ax, label="significant bits")
    ax.set_title(f"{site['module']}.{site['function']} "
                 f"#{inv['index']} {slot['path'] or 'value'}")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return True


def render_figures(doc: dict, out_dir: str) -> list[str]:
    """Render timeline/gantt/heatmap PNGs next to the delimited report."""
    import matplotlib
    matplotlib.use("Agg", force=False)

    os.makedirs(out_dir, exist_ok=True)
    written = []
    p = os.path.join(out_dir, "timeline.png")
    _timeline_figure(doc, p)
    written.append(p)
    p = os.path.join(out_dir, "gantt.png")
    _gantt_figure(doc, p)
    written.append(p)
    p = os.path.join(out_dir, "heatmap.png")
    if _heatmap_figure(doc, p):
        written.append(p)
    return written
