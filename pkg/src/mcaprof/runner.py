"""Multi-run orchestration: execute a kernel N times under forked contexts."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .kernels import KernelError, KernelSpec, get_kernel
from .mca import ArithContext, Mode
from .trace import CorruptTraceError, TraceHeader, open_trace

__all__ = ["RunManifest", "RunStatus", "run_many", "trace_path"]

STATUS_SUCCESS = "success"
STATUS_KERNEL_ERROR = "kernel_error"
STATUS_TRACE_CORRUPT = "trace_corrupt"


@dataclass
class RunStatus:
    run_index: int
    status: str
    trace_file: str | None = None
    error: str | None = None

    def to_obj(self):
        return {"run_index": self.run_index, "status": self.status,
                "trace_file": self.trace_file, "error": self.error}


@dataclass
class RunManifest:
    kernel: str
    params: dict
    mode: str
    t64: int
    t32: int
    seed: int
    n_runs: int
    out_dir: str
    statuses: list[RunStatus] = field(default_factory=list)

    @property
    def n_success(self) -> int:
        return sum(1 for s in self.statuses if s.status == STATUS_SUCCESS)

    def to_obj(self):
        return {
            "kernel": self.kernel, "params": self.params, "mode": self.mode,
            "t64": self.t64, "t32": self.t32, "seed": self.seed,
            "n_runs": self.n_runs, "out_dir": self.out_dir,
            "statuses": [s.to_obj() for s in self.statuses],
        }

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_obj(), fh, ensure_ascii=False,
                      separators=(",", ":"))
            fh.write("\n")


def trace_path(out_dir: str, run_index: int) -> str:
    return os.path.join(out_dir, f"trace-{run_index:04d}.jsonl")


def _run_one(spec: KernelSpec, params: dict, mode: str, t64: int, t32: int,
             seed: int, run_index: int, out_dir: str) -> RunStatus:
    path = trace_path(out_dir, run_index)
    ctx = ArithContext(mode=Mode(mode), t64=t64, t32=t32, seed=seed,
                       run_index=run_index)
    header = TraceHeader(
        run_id=f"{spec.name}-{mode}-t{t64}-s{seed}-r{run_index}",
        seed=seed, run_index=run_index, mode=mode, t64=t64, t32=t32,
        kernel=spec.name, params=params)
    try:
        writer = open_trace(path, header)
    except Exception as exc:
        return RunStatus(run_index, STATUS_TRACE_CORRUPT, None, str(exc))
    try:
        spec.run(ctx, writer, **params)
        writer.close()
    except KernelError as exc:
        writer.abort()
        if os.path.exists(path):
            os.unlink(path)
        return RunStatus(run_index, STATUS_KERNEL_ERROR, None, str(exc))
    except CorruptTraceError as exc:
        writer.abort()
        if os.path.exists(path):
            os.unlink(path)
        return RunStatus(run_index, STATUS_TRACE_CORRUPT, None, str(exc))
    return RunStatus(run_index, STATUS_SUCCESS,
                     os.path.basename(path), None)


def run_many(kernel: str, params: dict, mode: str = "rr", t64: int = 53,
             t32: int = 24, seed: int = 0, n_runs: int = 5,
             out_dir: str = ".", jobs: int = 1) -> RunManifest:
    """Execute n_runs independent perturbed runs and write trace files.

    Every run forks its own deterministic context from (seed, run_index),
    so results do not depend on scheduling.  A kernel failure is recorded
    in the manifest, never fatal to sibling runs.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    spec = get_kernel(kernel)
    full_params = spec.resolve(params)
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(kernel=spec.name, params=full_params, mode=mode,
                           t64=t64, t32=t32, seed=seed, n_runs=n_runs,
                           out_dir=out_dir)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, spec, full_params, mode, t64,
                                   t32, seed, i, out_dir)
                       for i in range(n_runs)]
            manifest.statuses = [f.result() for f in futures]
    else:
        manifest.statuses = [_run_one(spec, full_params, mode, t64, t32,
                                      seed, i, out_dir)
                             for i in range(n_runs)]
    manifest.write(os.path.join(out_dir, "manifest.json"))
    return manifest
