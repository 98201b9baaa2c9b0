"""Naive O(n^2) discrete Fourier transform of a two-tone signal.

The test signal is sin(50*2pi*x) + 0.5*sin(80*2pi*x) sampled on n
uniform points of one period, so the spectrum has dominant bins at
frequencies 50 and 80 plus their conjugate mirrors.  Transcendental
evaluations are native; they see noise only through their perturbed
arguments.
"""

from __future__ import annotations

import math

import numpy as np

from .. import mca
from .base import KernelError, here

MODULE = "kernels.dft"

_SITE_MAIN = here("run")
_SITE_SIGNAL = here("run")
_SITE_SPECTRUM = here("run")


def _tone(ctx, freq: int, n: int) -> np.ndarray:
    # sin(freq * 2pi * i/n) with the argument reduced to one period via
    # exact integer arithmetic; large raw arguments (up to ~100pi) would
    # otherwise hand the sine ulp(arg)-scale noise per sample
    k = np.mod(freq * np.arange(n, dtype=np.int64), n).astype(np.float64)
    frac = mca.perturbed_op(ctx, "div", k, float(n))
    return np.sin(np.asarray(mca.perturbed_op(ctx, "mul", frac, math.tau)))


def _signal(ctx, n: int) -> np.ndarray:
    tone1 = _tone(ctx, 50, n)
    tone2 = _tone(ctx, 80, n)
    half = mca.perturbed_op(ctx, "mul", 0.5, tone2)
    return mca.perturbed_op(ctx, "add", tone1, half)


def run(ctx, writer, n=600):
    n = int(n)
    if n < 2:
        raise KernelError(f"n must be >= 2, got {n}")

    h = writer.begin_call(MODULE, "dft", {"n": n}, _SITE_MAIN)

    h_sig = writer.begin_call(MODULE, "build_signal", {"n": n}, _SITE_SIGNAL)
    z = _signal(ctx, n)
    writer.end_call(h_sig, {"signal": z})

    h_spec = writer.begin_call(MODULE, "spectrum", {"n": n}, _SITE_SPECTRUM)
    k = np.arange(n, dtype=np.int64)
    kn = np.mod(np.outer(k, k), n).astype(np.float64)  # twiddle index, exact
    phase = mca.perturbed_op(
        ctx, "mul", mca.perturbed_op(ctx, "div", kn, float(n)), math.tau)
    re = mca.psum(ctx, mca.perturbed_op(ctx, "mul", z, np.cos(phase)))
    im = mca.psum(ctx, mca.perturbed_op(ctx, "mul", z, -np.sin(phase)))
    mag = mca.perturbed_op(
        ctx, "sqrt",
        mca.perturbed_op(ctx, "add",
                         mca.perturbed_op(ctx, "mul", re, re),
                         mca.perturbed_op(ctx, "mul", im, im)))
    writer.end_call(h_spec, {"re": re, "im": im, "magnitude": mag})

    writer.end_call(h, {"magnitude": mag})
    return {"signal": z, "re": re, "im": im, "magnitude": mag}
