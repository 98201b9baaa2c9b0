"""Linear classifier scores on a grid, with an engineered unstable band.

Evaluates sign(w . x + b) over a square grid.  By default the offset b
is chosen so the decision line runs exactly along one grid column:
there the true score is at the rounding-noise scale, the label flips
from run to run, and the score's significant bits collapse -- a
contiguous low-precision stripe.  Away from the line the margin dwarfs
the noise and labels are bit-stable.
"""

from __future__ import annotations

import numpy as np

from .. import mca
from .base import KernelError, here

MODULE = "kernels.hyperplane"

_SITE_MAIN = here("run")
_SITE_SCORE = here("run")
_SITE_LABEL = here("run")

_LO, _HI = -1.0, 5.0
_DEFAULT_W0 = 0.6180339887498949
_DEFAULT_W1 = 2.0**-60


def run(ctx, writer, w0=_DEFAULT_W0, w1=_DEFAULT_W1, grid_n=50,
        pivot_col=-1, use_auto_b=1, b=1.0):
    grid_n, pivot_col = int(grid_n), int(pivot_col)
    w0, w1, b = float(w0), float(w1), float(b)
    if grid_n < 2:
        raise KernelError(f"grid_n must be >= 2, got {grid_n}")
    if pivot_col < 0:
        pivot_col = (2 * grid_n) // 5
    if pivot_col >= grid_n:
        raise KernelError(f"pivot_col {pivot_col} outside grid of {grid_n}")

    # setup constants are native: the offset must not vary across runs
    pitch = (_HI - _LO) / (grid_n - 1)
    if int(use_auto_b):
        b = -(w0 * (_LO + pivot_col * pitch))

    h = writer.begin_call(MODULE, "classify_grid",
                          {"w": [w0, w1], "b": b, "grid_n": grid_n},
                          _SITE_MAIN)

    h_s = writer.begin_call(MODULE, "score_grid", {"grid_n": grid_n},
                            _SITE_SCORE)
    idx = np.arange(grid_n, dtype=np.float64)
    coords = np.asarray(mca.perturbed_op(
        ctx, "add", _LO, mca.perturbed_op(ctx, "mul", idx, pitch)))
    gx = np.broadcast_to(coords[None, :], (grid_n, grid_n))
    gy = np.broadcast_to(coords[:, None], (grid_n, grid_n))
    px = np.asarray(mca.perturbed_op(ctx, "mul", w0, gx))
    py = np.asarray(mca.perturbed_op(ctx, "mul", w1, gy))
    partial = mca.perturbed_op(ctx, "add", px, py)
    score = np.asarray(mca.perturbed_op(ctx, "add", partial, b))
    writer.end_call(h_s, {"score": score})

    h_l = writer.begin_call(MODULE, "label_grid", {"grid_n": grid_n},
                            _SITE_LABEL)
    labels = np.where(score >= 0.0, 1, -1).astype(np.int64)
    writer.end_call(h_l, {"labels": labels})

    writer.end_call(h, {"score": score, "labels": labels})
    return {"score": score, "labels": labels, "w": (w0, w1), "b": b}
