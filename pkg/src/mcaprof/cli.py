"""Command-line entry: run, aggregate, report, serve."""

from __future__ import annotations

import argparse
import os
import sys

from . import report as rep
from .aggregate import AggregationError, load_summary, summarize, write_summary
from .kernels import REGISTRY, KernelError, get_kernel, coerce_params
from .runner import run_many
from .trace import TraceError, read_trace

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ALL_RUNS_FAILED = 3
EXIT_NO_MERGEABLE_GROUP = 4


def _parse_params(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise KernelError(f"--param expects k=v, got {pair!r}")
        key, val = pair.split("=", 1)
        out[key] = val
    return out


def cmd_run(args) -> int:
    try:
        spec = get_kernel(args.kernel)
        params = coerce_params(spec, _parse_params(args.param))
    except KernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = run_many(args.kernel, params, mode=args.mode, t64=args.t64,
                        t32=args.t32, seed=args.seed, n_runs=args.samples,
                        out_dir=args.out, jobs=args.jobs)
    for status in manifest.statuses:
        line = f"run {status.run_index}: {status.status}"
        if status.error:
            line += f" ({status.error})"
        print(line)
    if manifest.n_success == 0:
        print("error: zero successful runs", file=sys.stderr)
        return EXIT_ALL_RUNS_FAILED
    print(f"wrote {manifest.n_success}/{manifest.n_runs} traces to "
          f"{manifest.out_dir}")
    return EXIT_OK


def _load_traces(trace_dir: str):
    names = sorted(n for n in os.listdir(trace_dir)
                   if n.startswith("trace-") and n.endswith(".jsonl"))
    if not names:
        raise TraceError(f"no trace-*.jsonl files in {trace_dir!r}")
    return [read_trace(os.path.join(trace_dir, n)) for n in names]


def cmd_aggregate(args) -> int:
    try:
        traces = _load_traces(args.traces)
        doc = summarize(traces)
    except (TraceError, AggregationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_summary(doc, args.out)
    meta = doc.meta
    if len(meta["groups"]) > 1:
        chosen = len(meta["chosen_runs"])
        print(f"divergence: {len(meta['groups'])} control-flow groups over "
              f"{meta['n_runs']} runs; merged largest group of {chosen}",
              file=sys.stderr)
        for out in meta["divergence"]:
            print(f"  run {out['run_index']} departs at event "
                  f"{out['first_divergence_event']}", file=sys.stderr)
    print(f"wrote summary to {args.out}")
    if meta["uninformative"]:
        print("warning: chosen group has a single run; statistics are "
              "uninformative", file=sys.stderr)
        return EXIT_NO_MERGEABLE_GROUP
    return EXIT_OK


def cmd_report(args) -> int:
    doc = load_summary(args.summary)
    sys.stdout.write(rep.render_report(doc))
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        csv_path = os.path.join(args.out_dir, "report.csv")
        rep.write_csv(doc, csv_path)
        figures = rep.render_figures(doc, args.out_dir)
        print(f"wrote {csv_path} and {len(figures)} figure(s) to "
              f"{args.out_dir}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .serve import serve_summary

    doc = load_summary(args.summary)
    if not os.path.isdir(args.source_root):
        print(f"error: source root {args.source_root!r} is not a directory",
              file=sys.stderr)
        return EXIT_USAGE
    print(f"serving {args.summary} on http://{args.host}:{args.port}")
    serve_summary(doc, args.source_root, args.port, host=args.host)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcaprof",
        description="Profile numerical instability by running kernels under "
                    "Monte Carlo Arithmetic and aggregating call traces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute perturbed runs of a kernel")
    p_run.add_argument("--kernel", required=True,
                       help=f"one of: {', '.join(sorted(REGISTRY))}")
    p_run.add_argument("--param", action="append", default=[],
                       metavar="K=V", help="kernel parameter override")
    p_run.add_argument("--mode", default="rr",
                       choices=["ieee", "rr", "pb", "mca"])
    p_run.add_argument("--t64", type=int, default=53,
                       help="virtual precision for 64-bit values")
    p_run.add_argument("--t32", type=int, default=24,
                       help="virtual precision for 32-bit values")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--samples", type=int, default=5,
                       help="number of perturbed runs")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="concurrent runs (independent contexts)")
    p_run.set_defaults(func=cmd_run)

    p_agg = sub.add_parser("aggregate", help="merge traces into a summary")
    p_agg.add_argument("--traces", required=True, help="trace directory")
    p_agg.add_argument("--out", required=True, help="summary file path")
    p_agg.set_defaults(func=cmd_aggregate)

    p_rep = sub.add_parser("report", help="text table over a summary")
    p_rep.add_argument("summary")
    p_rep.add_argument("--out-dir", default=None,
                       help="also write report.csv and figures here")
    p_rep.set_defaults(func=cmd_report)

    p_srv = sub.add_parser("serve", help="HTTP API for the dashboard")
    p_srv.add_argument("summary")
    p_srv.add_argument("--source-root", required=True,
                       help="directory that trace backtrace paths resolve in")
    p_srv.add_argument("--port", type=int, default=8764)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
