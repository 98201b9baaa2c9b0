"""Trace alignment and per-variable significance statistics.

Given N traces of the same kernel run under perturbation, this module
groups them by control-flow signature (a payload-independent digest of
the event stream), keeps the largest mergeable group, and computes per
call site, per invocation, per element the sample mean, the sample
standard deviation (n-1 denominator) and the significant-bits estimate

    s = -log2 |sigma / mu|

clamped to [0, cap], where cap is the virtual precision of the slot's
dtype.  Zero spread means every bit agrees, so s saturates at the cap;
a zero mean with nonzero spread carries no significant bits at all.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .trace import CallEvent, TraceData

__all__ = [
    "AggregationError",
    "ControlFlowSignature",
    "DivergenceReport",
    "SummaryDocument",
    "sigbits",
    "sigbits_array",
    "signature_of",
    "align_and_group",
    "aggregate",
    "summarize",
    "write_summary",
    "load_summary",
]


class AggregationError(Exception):
    pass


def sigbits(mu: float, sigma: float, cap: float) -> float:
    """Significant bits of a sampled variable (scalar form)."""
    if sigma == 0.0:
        return float(cap)
    if mu == 0.0 or not (math.isfinite(mu) and math.isfinite(sigma)):
        return 0.0
    s = -math.log2(abs(sigma / mu))
    return min(max(s, 0.0), float(cap))


def sigbits_array(mu: np.ndarray, sigma: np.ndarray, cap: float) -> np.ndarray:
    """Vectorized :func:`sigbits` over matching-shape arrays."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(sigma / mu)
        s = np.clip(-np.log2(ratio), 0.0, float(cap))
    s = np.where(np.isfinite(s), s, 0.0)
    s = np.where((mu == 0.0) & (sigma > 0.0), 0.0, s)
    s = np.where(sigma == 0.0, float(cap), s)
    return s


# -- control-flow signatures --------------------------------------------------

@dataclass(frozen=True)
class ControlFlowSignature:
    """Ordered digest of a trace's event structure, payload-independent."""

    event_digests: tuple[str, ...]
    digest: str = field(default="")

    def __eq__(self, other):
        return isinstance(other, ControlFlowSignature) and self.digest == other.digest

    def __hash__(self):
        return hash(self.digest)


def _event_digest(ev: CallEvent) -> str:
    ident = (
        ev.kind, ev.module, ev.function,
        tuple((f.file, f.line, f.fn) for f in ev.backtrace),
        tuple((v.path, v.dtype, tuple(v.shape)) for v in ev.values),
    )
    blob = json.dumps(ident, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def signature_of(trace: TraceData) -> ControlFlowSignature:
    digests = tuple(_event_digest(ev) for ev in trace.events)
    total = hashlib.sha256("".join(digests).encode()).hexdigest()[:16]
    return ControlFlowSignature(event_digests=digests, digest=total)


@dataclass
class DivergenceReport:
    groups: list[dict]           # {"digest", "runs", "size"}, largest first
    chosen_digest: str
    chosen_runs: list[int]
    outsiders: list[dict]        # {"run_index", "first_divergence_event"}

    @property
    def n_groups(self) -> int:
        return len(self.groups)


def _check_headers(traces: list[TraceData]) -> None:
    first = traces[0].header
    for t in traces[1:]:
        h = t.header
        same = (h.kernel == first.kernel and h.params == first.params
                and h.mode == first.mode and h.t64 == first.t64
                and h.t32 == first.t32)
        if not same:
            raise AggregationError(
                f"trace {t.path!r} is from kernel {h.kernel!r} params "
                f"{h.params} mode {h.mode!r}, expected {first.kernel!r} "
                f"{first.params} {first.mode!r}")


def _first_divergence(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    n = min(len(a), len(b))
    for i in range(n):
        if a[i] != b[i]:
            return i
    return n


def align_and_group(traces: list[TraceData]) -> DivergenceReport:
    """Partition traces by signature and pick the largest mergeable group.

    Ties go to the group containing the lowest run index.  Every
    outsider is reported with the first event index at which its
    signature departs from the chosen group's.
    """
    if not traces:
        raise AggregationError("no traces to align")
    _check_headers(traces)
    sigs = {t.header.run_index: signature_of(t) for t in traces}
    by_digest: dict[str, list[int]] = {}
    for run, sig in sorted(sigs.items()):
        by_digest.setdefault(sig.digest, []).append(run)
    groups = sorted(by_digest.items(), key=lambda kv: (-len(kv[1]), min(kv[1])))
    chosen_digest, chosen_runs = groups[0]
    chosen_sig = sigs[chosen_runs[0]]
    outsiders = []
    for digest, runs in groups[1:]:
        for run in runs:
            outsiders.append({
                "run_index": run,
                "first_divergence_event": _first_divergence(
                    chosen_sig.event_digests, sigs[run].event_digests),
            })
    outsiders.sort(key=lambda o: o["run_index"])
    return DivergenceReport(
        groups=[{"digest": d, "runs": r, "size": len(r)} for d, r in groups],
        chosen_digest=chosen_digest,
        chosen_runs=list(chosen_runs),
        outsiders=outsiders)


# -- aggregation --------------------------------------------------------------

@dataclass
class SummaryDocument:
    meta: dict
    callsites: list[dict]

    def to_obj(self) -> dict:
        return {"meta": self.meta, "callsites": self.callsites}


def _stack_stats(stacks: np.ndarray, cap: float) -> tuple:
    """(mean, std, sigbits) over axis 0 of [n_runs, *shape] samples.

    Bit-identical samples are detected first so that exact agreement
    yields sigma == 0.0 exactly, not a rounding residue.
    """
    n = stacks.shape[0]
    mean = stacks.mean(axis=0)
    if n == 1:
        std = np.zeros_like(mean)
    else:
        allsame = (stacks == stacks[0]).all(axis=0)
        std = np.where(allsame, 0.0, stacks.std(axis=0, ddof=1))
        mean = np.where(allsame, stacks[0], mean)
    return mean, std, sigbits_array(mean, std, cap)


def _json_safe(x: float):
    return float(x) if math.isfinite(x) else None


def _slot_stats(slots_over_runs, cap_for, n_runs: int) -> list[dict]:
    out = []
    ref = slots_over_runs[0]
    for idx, slot in enumerate(ref):
        arrs = []
        for run_slots in slots_over_runs:
            s = run_slots[idx]
            if s.path != slot.path or tuple(s.shape) != tuple(slot.shape):
                raise AggregationError(
                    f"internal: slot mismatch inside aligned group at "
                    f"{slot.path!r}: signatures should have prevented this")
            arrs.append(s.to_numpy().astype(np.float64))
        stack = np.stack(arrs, axis=0)
        cap = cap_for(slot.dtype)
        mean, std, sig = _stack_stats(stack, cap)
        mean_l = np.atleast_1d(mean).ravel()
        std_l = np.atleast_1d(std).ravel()
        sig_l = np.atleast_1d(sig).ravel()
        out.append({
            "path": slot.path,
            "dtype": slot.dtype,
            "shape": list(slot.shape),
            "mean": [_json_safe(v) for v in mean_l],
            "std": [_json_safe(v) for v in std_l],
            "sigbits": [float(v) for v in sig_l],
            "rollup_sigbits": float(sig_l.mean()) if sig_l.size else float(cap),
            "inf_norm": _json_safe(float(np.max(np.abs(mean_l))) if mean_l.size else 0.0),
        })
    return out


def aggregate(traces: list[TraceData],
              divergence: DivergenceReport | None = None,
              n_runs: int | None = None) -> SummaryDocument:
    """Elementwise statistics over an aligned group of traces.

    ``traces`` must share one control-flow signature (callers go through
    :func:`align_and_group` first); they are canonicalized by run index
    so the output is invariant under input permutation.
    """
    if not traces:
        raise AggregationError("nothing to aggregate")
    traces = sorted(traces, key=lambda t: t.header.run_index)
    _check_headers(traces)
    head = traces[0].header
    n = len(traces)
    cap_for = lambda dtype: float(head.t32 if dtype == "f32" else head.t64)

    pair_lists = [t.paired_intervals() for t in traces]
    ref_pairs = pair_lists[0]

    site_ids: dict[tuple, int] = {}
    callsites: list[dict] = []
    for pair_idx, (ev_in, ev_out) in enumerate(ref_pairs):
        key = (ev_in.module, ev_in.function,
               tuple((f.file, f.line, f.fn) for f in ev_in.backtrace))
        if key not in site_ids:
            site_ids[key] = len(callsites)
            callsites.append({
                "id": str(len(callsites)),
                "module": ev_in.module,
                "function": ev_in.function,
                "backtrace": [f.to_obj() for f in ev_in.backtrace],
                "invocations": [],
            })
        site = callsites[site_ids[key]]
        inputs_over_runs = [pl[pair_idx][0].values for pl in pair_lists]
        outputs_over_runs = [pl[pair_idx][1].values for pl in pair_lists]
        site["invocations"].append({
            "index": len(site["invocations"]),
            "counter_start": ev_in.counter,
            "counter_end": ev_out.counter,
            "depth": ev_in.depth,
            "inputs": _slot_stats(inputs_over_runs, cap_for, n),
            "outputs": _slot_stats(outputs_over_runs, cap_for, n),
        })

    seeds = sorted({t.header.seed for t in traces})
    meta = {
        "kernel": head.kernel,
        "params": head.params,
        "mode": head.mode,
        "t64": head.t64,
        "t32": head.t32,
        "seed": seeds[0] if len(seeds) == 1 else None,
        "n_runs": n_runs if n_runs is not None else n,
        "chosen_runs": [t.header.run_index for t in traces],
        "groups": divergence.groups if divergence else [
            {"digest": signature_of(traces[0]).digest,
             "runs": [t.header.run_index for t in traces], "size": n}],
        "divergence": divergence.outsiders if divergence else [],
        "uninformative": n == 1,
    }
    return SummaryDocument(meta=meta, callsites=callsites)


def summarize(traces: list[TraceData]) -> SummaryDocument:
    """Group, choose the largest consistent subset, and aggregate it."""
    if len(traces) == 1:
        return aggregate(traces, n_runs=1)
    report = align_and_group(traces)
    chosen = [t for t in traces if t.header.run_index in report.chosen_runs]
    return aggregate(chosen, divergence=report, n_runs=len(traces))


def write_summary(doc: SummaryDocument, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc.to_obj(), fh, ensure_ascii=False,
                  separators=(",", ":"), allow_nan=False)
        fh.write("\n")


def load_summary(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
