"""Equally-spaced array construction with a float-typed length.

The element count is computed as ceil((stop - start) / step) through
perturbed arithmetic.  Under full MCA the intermediate length picks up
noise and the ceil flips between adjacent integers across runs; under
random rounding every operation here is exact, so all runs agree.
"""

from __future__ import annotations

import math

import numpy as np

from .. import mca
from .base import KernelError, here

MODULE = "kernels.arange"

_SITE_MAIN = here("run")
_SITE_LENGTH = here("run")
_SITE_FILL = here("run")


def run(ctx, writer, start=0.0, stop=600.0, step=1.0):
    start, stop, step = float(start), float(stop), float(step)
    if step == 0.0:
        raise KernelError("step must be nonzero")
    if (stop - start) / step <= 0.0:
        raise KernelError("(stop - start) / step must be positive")

    h = writer.begin_call(MODULE, "arange",
                          {"start": start, "stop": stop, "step": step},
                          _SITE_MAIN)

    h_len = writer.begin_call(MODULE, "compute_length",
                              {"start": start, "stop": stop, "step": step},
                              _SITE_LENGTH)
    delta = mca.perturbed_op(ctx, "sub", stop, start)
    tmp_len = mca.perturbed_op(ctx, "div", delta, step)
    length = int(math.ceil(tmp_len))
    writer.end_call(h_len, {"delta": delta, "tmp_len": tmp_len,
                            "length": length})
    if length <= 0:
        raise KernelError(f"computed non-positive length {length}")

    h_fill = writer.begin_call(MODULE, "fill", {"length": length}, _SITE_FILL)
    idx = np.arange(length, dtype=np.float64)
    values = mca.perturbed_op(ctx, "add", start,
                              mca.perturbed_op(ctx, "mul", idx, step))
    writer.end_call(h_fill, {"values": values})

    writer.end_call(h, {"length": length, "values": values})
    return {"length": length, "values": values}
