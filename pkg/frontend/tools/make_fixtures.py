"""Regenerate tests/fixtures from the profiler's real API responses.

Run from the repository root with the Python package installed:

    python frontend/tools/make_fixtures.py
"""

import json
import os
import tempfile

import mcaprof as m
from mcaprof.aggregate import summarize
from mcaprof.runner import run_many
from mcaprof.serve import SummaryAPI

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")
SOURCE_ROOT = os.path.dirname(m.__file__)


def build(kernel, params, seed, samples, tag, t64=53):
    with tempfile.TemporaryDirectory() as td:
        manifest = run_many(kernel, params, mode="rr", t64=t64, seed=seed,
                            n_runs=samples, out_dir=td)
        traces = [m.read_trace(os.path.join(td, s.trace_file))
                  for s in manifest.statuses if s.trace_file]
        doc = summarize(traces).to_obj()
    api = SummaryAPI(doc, source_root=SOURCE_ROOT)
    bundle = {
        "meta": api.meta(),
        "callsites": api.callsites(),
        "gantt": api.gantt(),
        "timelines": {cs["id"]: api.timeline(cs["id"], "sigbits")
                      for cs in api.callsites()},
    }
    with open(os.path.join(FIXTURES, f"{tag}.json"), "w") as fh:
        json.dump(bundle, fh, indent=1)
    return api


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    build("arange", {}, seed=3, samples=5, tag="arange")

    api = build("unstable_branch", {"grid_n": 24}, seed=11, samples=8,
                tag="branch")
    score = [c for c in api.callsites() if c["function"] == "score_grid"][0]
    with open(os.path.join(FIXTURES, "branch_score_slot.json"), "w") as fh:
        json.dump(api.slot(score["id"], "0", "score", "out", "sigbits"),
                  fh, indent=1)
    with open(os.path.join(FIXTURES, "source_snippet.json"), "w") as fh:
        json.dump(api.source("kernels/hyperplane.py", "30", "6"), fh,
                  indent=1)

    api = build("newton_root", {}, seed=1, samples=5, tag="newton")
    site = [c for c in api.callsites() if c["function"] == "newton"][0]
    with open(os.path.join(FIXTURES, "newton_root_slot.json"), "w") as fh:
        json.dump(api.slot(site["id"], "0", "root", "out", "sigbits"),
                  fh, indent=1)
    print(f"wrote fixtures to {os.path.abspath(FIXTURES)}")


if __name__ == "__main__":
    main()
