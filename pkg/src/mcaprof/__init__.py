"""mcaprof: numerical-instability profiling under Monte Carlo Arithmetic.

Run instrumented kernels many times with stochastic floating-point
perturbation, record call-level traces, and aggregate them into
per-variable significant-bits statistics served to a report CLI and an
interactive dashboard.
"""

from .aggregate import (AggregationError, SummaryDocument, aggregate,
                        align_and_group, load_summary, sigbits,
                        sigbits_array, signature_of, summarize,
                        write_summary)
from .kernels import REGISTRY, KernelError, get_kernel
from .mca import (ArithContext, Mode, exponent_of, fork_stream, inexact,
                  pdot, perturbed_op, psum)
from .runner import RunManifest, run_many
from .trace import (CallEvent, CorruptTraceError, Frame, NullWriter,
                    TraceError, TraceHeader, TraceWriter, ValueSlot,
                    flatten_value, open_trace, read_trace)

__version__ = "0.1.0"

__all__ = [
    "AggregationError", "ArithContext", "CallEvent", "CorruptTraceError",
    "Frame", "KernelError", "Mode", "NullWriter", "REGISTRY", "RunManifest",
    "SummaryDocument", "TraceError", "TraceHeader", "TraceWriter",
    "ValueSlot", "aggregate", "align_and_group", "exponent_of",
    "flatten_value", "fork_stream", "get_kernel", "inexact", "load_summary",
    "open_trace", "pdot", "perturbed_op", "psum", "read_trace", "run_many",
    "sigbits", "sigbits_array", "signature_of", "summarize", "write_summary",
]
