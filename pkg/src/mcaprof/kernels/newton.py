"""Newton root finding on x^3 - 2x - 5 from x0 = 2.

Two stopping policies: ``fixed_iters`` always runs the same number of
steps so traces align across perturbed runs; ``strict`` stops on
|f(x)| < tol, which near the noise floor makes the iteration count
sample-dependent on purpose.  The true root is 2.0945514815423265...
"""

from __future__ import annotations

import numpy as np

from .. import mca
from .base import KernelError, here

MODULE = "kernels.newton"

_SITE_MAIN = here("run")
_SITE_STEP = here("run")

_STRICT_CAP = 40  # termination backstop when the tolerance is unreachable


def _f(ctx, x):
    x2 = mca.perturbed_op(ctx, "mul", x, x)
    x3 = mca.perturbed_op(ctx, "mul", x2, x)
    return mca.perturbed_op(
        ctx, "sub", mca.perturbed_op(ctx, "sub", x3,
                                     mca.perturbed_op(ctx, "mul", 2.0, x)),
        5.0)


def _fprime(ctx, x):
    x2 = mca.perturbed_op(ctx, "mul", x, x)
    return mca.perturbed_op(ctx, "sub",
                            mca.perturbed_op(ctx, "mul", 3.0, x2), 2.0)


def run(ctx, writer, threshold_mode="fixed_iters", x0=2.0, tol=1e-12,
        fixed_iters=8):
    if threshold_mode not in ("strict", "fixed_iters"):
        raise KernelError(f"unknown threshold_mode {threshold_mode!r}")
    x = float(x0)
    tol = float(tol)
    fixed_iters = int(fixed_iters)

    h = writer.begin_call(MODULE, "newton",
                          {"threshold_mode": threshold_mode, "x0": x,
                           "tol": tol, "fixed_iters": fixed_iters},
                          _SITE_MAIN)
    iterations = 0
    fx = _f(ctx, x)
    while True:
        if threshold_mode == "fixed_iters":
            if iterations >= fixed_iters:
                break
        else:
            if abs(fx) < tol or iterations >= _STRICT_CAP:
                break
        hstep = writer.begin_call(MODULE, "step",
                                  {"k": iterations, "x": x}, _SITE_STEP)
        fpx = _fprime(ctx, x)
        x = mca.perturbed_op(ctx, "sub", x,
                             mca.perturbed_op(ctx, "div", fx, fpx))
        fx = _f(ctx, x)
        iterations += 1
        writer.end_call(hstep, {"x": x, "f": fx})

    writer.end_call(h, {"root": x, "f": fx, "iterations": iterations})
    return {"root": x, "f": fx, "iterations": iterations}
