"""1-D interpolation of cos(-x^2/9) from a coarse knot set.

Knots are laid out on [0, 10] and the interpolant (piecewise linear or
natural cubic spline) is evaluated on a denser uniform grid.  Interval
lookup uses native comparisons; all value arithmetic is perturbed.
"""

from __future__ import annotations

import numpy as np

from .. import mca
from .base import KernelError, here

MODULE = "kernels.interp"

_SITE_MAIN = here("run")
_SITE_KNOTS = here("run")
_SITE_EVAL = here("run")

_SPAN = 10.0


def _f(ctx, x):
    """cos(-x^2/9) with the argument built from perturbed ops."""
    sq = mca.perturbed_op(ctx, "mul", x, x)
    arg = mca.perturbed_op(ctx, "div", sq, 9.0)
    return np.cos(-np.asarray(arg, dtype=np.float64))


def _grid(ctx, n: int) -> np.ndarray:
    step = mca.perturbed_op(ctx, "div", _SPAN, float(n - 1))
    idx = np.arange(n, dtype=np.float64)
    return np.asarray(mca.perturbed_op(ctx, "mul", idx, step))


def _solve_tridiag(ctx, lower, diag, upper, rhs):
    """Thomas algorithm under perturbed arithmetic."""
    n = len(rhs)
    cp = np.zeros(n)
    dp = np.zeros(n)
    cp[0] = mca.perturbed_op(ctx, "div", upper[0], diag[0])
    dp[0] = mca.perturbed_op(ctx, "div", rhs[0], diag[0])
    for i in range(1, n):
        denom = mca.perturbed_op(
            ctx, "sub", diag[i],
            mca.perturbed_op(ctx, "mul", lower[i], cp[i - 1]))
        if i < n - 1:
            cp[i] = mca.perturbed_op(ctx, "div", upper[i], denom)
        num = mca.perturbed_op(
            ctx, "sub", rhs[i],
            mca.perturbed_op(ctx, "mul", lower[i], dp[i - 1]))
        dp[i] = mca.perturbed_op(ctx, "div", num, denom)
    x = np.zeros(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = mca.perturbed_op(
            ctx, "sub", dp[i], mca.perturbed_op(ctx, "mul", cp[i], x[i + 1]))
    return x


def _natural_spline_m(ctx, xs, ys):
    """Second derivatives of the natural cubic spline through the knots."""
    n = len(xs)
    h = mca.perturbed_op(ctx, "sub", xs[1:], xs[:-1])
    slope = mca.perturbed_op(
        ctx, "div", mca.perturbed_op(ctx, "sub", ys[1:], ys[:-1]), h)
    m = n - 2
    lower = np.zeros(m)
    diag = np.zeros(m)
    upper = np.zeros(m)
    rhs = np.zeros(m)
    for j in range(m):
        k = j + 1
        lower[j] = h[k - 1]
        upper[j] = h[k]
        diag[j] = mca.perturbed_op(
            ctx, "mul", 2.0, mca.perturbed_op(ctx, "add", h[k - 1], h[k]))
        rhs[j] = mca.perturbed_op(
            ctx, "mul", 6.0,
            mca.perturbed_op(ctx, "sub", slope[k], slope[k - 1]))
    inner = _solve_tridiag(ctx, lower, diag, upper, rhs)
    return np.concatenate([[0.0], inner, [0.0]])


def _eval_linear(ctx, xs, ys, xq):
    # symmetric form (1-t)*y0 + t*y1: exact at both interval endpoints
    idx = np.clip(np.searchsorted(xs, xq, side="right") - 1, 0, len(xs) - 2)
    x0, x1 = xs[idx], xs[idx + 1]
    y0, y1 = ys[idx], ys[idx + 1]
    t = mca.perturbed_op(ctx, "div",
                         mca.perturbed_op(ctx, "sub", xq, x0),
                         mca.perturbed_op(ctx, "sub", x1, x0))
    s = mca.perturbed_op(ctx, "sub", 1.0, t)
    return mca.perturbed_op(ctx, "add",
                            mca.perturbed_op(ctx, "mul", s, y0),
                            mca.perturbed_op(ctx, "mul", t, y1))


def _eval_cubic(ctx, xs, ys, m2, xq):
    idx = np.clip(np.searchsorted(xs, xq, side="right") - 1, 0, len(xs) - 2)
    x0, x1 = xs[idx], xs[idx + 1]
    y0, y1 = ys[idx], ys[idx + 1]
    h = mca.perturbed_op(ctx, "sub", x1, x0)
    a = mca.perturbed_op(ctx, "div", mca.perturbed_op(ctx, "sub", x1, xq), h)
    b = mca.perturbed_op(ctx, "div", mca.perturbed_op(ctx, "sub", xq, x0), h)
    h2_6 = mca.perturbed_op(ctx, "div",
                            mca.perturbed_op(ctx, "mul", h, h), 6.0)

    def cubic_weight(w):
        w3 = mca.perturbed_op(ctx, "mul",
                              mca.perturbed_op(ctx, "mul", w, w), w)
        return mca.perturbed_op(
            ctx, "mul", mca.perturbed_op(ctx, "sub", w3, w), h2_6)

    out = mca.perturbed_op(ctx, "add",
                           mca.perturbed_op(ctx, "mul", a, y0),
                           mca.perturbed_op(ctx, "mul", b, y1))
    out = mca.perturbed_op(ctx, "add", out,
                           mca.perturbed_op(ctx, "mul", cubic_weight(a),
                                            m2[idx]))
    return mca.perturbed_op(ctx, "add", out,
                            mca.perturbed_op(ctx, "mul", cubic_weight(b),
                                             m2[idx + 1]))


def run(ctx, writer, n_knots=11, method="linear", n_eval=41):
    n_knots, n_eval = int(n_knots), int(n_eval)
    if method not in ("linear", "cubic"):
        raise KernelError(f"unknown method {method!r}")
    if method == "cubic" and n_knots < 4:
        raise KernelError("cubic interpolation needs n_knots >= 4")
    if n_knots < 2 or n_eval < 2:
        raise KernelError("n_knots and n_eval must be >= 2")

    h = writer.begin_call(MODULE, "interp1d",
                          {"n_knots": n_knots, "method": method,
                           "n_eval": n_eval}, _SITE_MAIN)

    h_k = writer.begin_call(MODULE, "build_knots", {"n_knots": n_knots},
                            _SITE_KNOTS)
    xs = _grid(ctx, n_knots)
    ys = _f(ctx, xs)
    writer.end_call(h_k, {"x": xs, "y": ys})

    h_e = writer.begin_call(MODULE, "evaluate", {"n_eval": n_eval},
                            _SITE_EVAL)
    xq = _grid(ctx, n_eval)
    if method == "linear":
        yq = _eval_linear(ctx, xs, ys, xq)
    else:
        m2 = _natural_spline_m(ctx, xs, ys)
        yq = _eval_cubic(ctx, xs, ys, m2, xq)
    yq = np.asarray(yq)
    writer.end_call(h_e, {"x": xq, "y": yq})

    writer.end_call(h, {"y": yq})
    return {"knots_x": xs, "knots_y": ys, "x": xq, "y": yq}
