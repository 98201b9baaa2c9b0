"""Unconstrained Rosenbrock minimization under perturbed arithmetic.

Both optimizers run a fixed number of outer iterations so the traced
event sequence is identical across perturbed runs; data-dependent
stopping would make traces structurally divergent.  A rejected line
search keeps the current iterate and the loop simply continues.

f(x) = sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2, minimum 0 at x = 1.
"""

from __future__ import annotations

import numpy as np

from .. import mca
from .base import KernelError, here

MODULE = "kernels.optimize"

_SITE_MAIN = here("run")
_SITE_STEP = here("run")

_START_CYCLE = (1.3, 0.7, 0.8, 1.9, 1.2)
DEFAULT_ITERS = {"bfgs": 100, "nelder_mead": 400}
_ARMIJO_C = 1e-4


def start_point(n: int) -> np.ndarray:
    reps = -(-n // len(_START_CYCLE))
    return np.array((_START_CYCLE * reps)[:n], dtype=np.float64)


def rosenbrock(ctx, x):
    x0, x1 = x[:-1], x[1:]
    d = mca.perturbed_op(ctx, "sub", x1, mca.perturbed_op(ctx, "mul", x0, x0))
    t1 = mca.perturbed_op(ctx, "mul", 100.0,
                          mca.perturbed_op(ctx, "mul", d, d))
    e = mca.perturbed_op(ctx, "sub", 1.0, x0)
    t2 = mca.perturbed_op(ctx, "mul", e, e)
    return mca.psum(ctx, mca.perturbed_op(ctx, "add", t1, t2))


def rosenbrock_grad(ctx, x):
    n = len(x)
    x0 = x[:-1]
    d = mca.perturbed_op(ctx, "sub", x[1:],
                         mca.perturbed_op(ctx, "mul", x0, x0))
    lead = mca.perturbed_op(
        ctx, "sub",
        mca.perturbed_op(ctx, "mul", -400.0,
                         mca.perturbed_op(ctx, "mul", x0, d)),
        mca.perturbed_op(ctx, "mul", 2.0,
                         mca.perturbed_op(ctx, "sub", 1.0, x0)))
    trail = mca.perturbed_op(ctx, "mul", 200.0, d)
    g = np.zeros(n)
    g[0] = lead[0]
    g[n - 1] = trail[n - 2]
    if n > 2:
        g[1:n - 1] = mca.perturbed_op(ctx, "add", lead[1:], trail[:-1])
    return g


def _pmatmul(ctx, a, b):
    prods = mca.perturbed_op(ctx, "mul", a[:, None, :],
                             np.ascontiguousarray(b.T)[None, :, :])
    return mca.psum(ctx, np.asarray(prods))


def _bfgs(ctx, writer, x, iters):
    n = len(x)
    ident = np.eye(n)
    h_mat = np.eye(n)
    f = rosenbrock(ctx, x)
    g = rosenbrock_grad(ctx, x)
    for k in range(iters):
        hstep = writer.begin_call(MODULE, "step", {"k": k, "x": x},
                                  _SITE_STEP)
        d = -np.asarray(mca.pdot(ctx, h_mat, g))
        slope = mca.pdot(ctx, g, d)
        if not np.isfinite(slope) or slope >= 0.0:
            d = -g
            slope = mca.pdot(ctx, g, d)
        alpha, accepted, xn, fn = 1.0, False, x, f
        for _ in range(60):
            xn = np.asarray(mca.perturbed_op(
                ctx, "add", x, mca.perturbed_op(ctx, "mul", alpha, d)))
            fn = rosenbrock(ctx, xn)
            armijo = mca.perturbed_op(
                ctx, "add", f,
                mca.perturbed_op(ctx, "mul", _ARMIJO_C,
                                 mca.perturbed_op(ctx, "mul", alpha, slope)))
            if np.isfinite(fn) and fn <= armijo:
                accepted = True
                break
            alpha = mca.perturbed_op(ctx, "mul", 0.5, alpha)
        if accepted:
            gn = rosenbrock_grad(ctx, xn)
            s = mca.perturbed_op(ctx, "sub", xn, x)
            y = mca.perturbed_op(ctx, "sub", gn, g)
            sy = mca.pdot(ctx, s, y)
            if np.isfinite(sy) and sy > 1e-14:
                rho = mca.perturbed_op(ctx, "div", 1.0, sy)
                s_col = np.asarray(s)[:, None]
                outer_sy = mca.perturbed_op(ctx, "mul", s_col,
                                            np.asarray(y)[None, :])
                v = mca.perturbed_op(
                    ctx, "sub", ident,
                    mca.perturbed_op(ctx, "mul", rho, outer_sy))
                h_mat = _pmatmul(ctx, _pmatmul(ctx, np.asarray(v), h_mat),
                                 np.ascontiguousarray(np.asarray(v).T))
                outer_ss = mca.perturbed_op(ctx, "mul", s_col,
                                            np.asarray(s)[None, :])
                h_mat = np.asarray(mca.perturbed_op(
                    ctx, "add", h_mat,
                    mca.perturbed_op(ctx, "mul", rho, outer_ss)))
            x, f, g = xn, fn, gn
        writer.end_call(hstep, {"x": x, "f": f})
    grad_norm = float(np.max(np.abs(g)))
    return x, f, grad_norm < 1e-5


def _nelder_mead(ctx, writer, x0, iters):
    n = len(x0)
    simplex = [np.array(x0)]
    for i in range(n):
        v = np.array(x0)
        v[i] = mca.perturbed_op(ctx, "mul", v[i], 1.05) if v[i] != 0.0 else 0.00025
        simplex.append(v)
    fs = [rosenbrock(ctx, v) for v in simplex]

    def order():
        idx = np.argsort(fs, kind="stable")
        return [simplex[i] for i in idx], [fs[i] for i in idx]

    for k in range(iters):
        simplex, fs = order()
        hstep = writer.begin_call(MODULE, "step",
                                  {"k": k, "x": simplex[0]}, _SITE_STEP)
        best = np.stack(simplex[:-1])
        centroid = mca.perturbed_op(
            ctx, "div", mca.psum(ctx, np.ascontiguousarray(best.T)), float(n))
        centroid = np.asarray(centroid)
        worst = simplex[-1]

        def along(coef):
            step = mca.perturbed_op(
                ctx, "mul", coef, mca.perturbed_op(ctx, "sub", centroid, worst))
            return np.asarray(mca.perturbed_op(ctx, "add", centroid, step))

        xr = along(1.0)
        fr = rosenbrock(ctx, xr)
        if fr < fs[0]:
            xe = along(2.0)
            fe = rosenbrock(ctx, xe)
            simplex[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
        else:
            xc = along(-0.5) if fr >= fs[-1] else along(0.5)
            fc = rosenbrock(ctx, xc)
            if fc < min(fr, fs[-1]):
                simplex[-1], fs[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    mid = mca.perturbed_op(
                        ctx, "add", simplex[0], simplex[i])
                    simplex[i] = np.asarray(
                        mca.perturbed_op(ctx, "mul", 0.5, mid))
                    fs[i] = rosenbrock(ctx, simplex[i])
        writer.end_call(hstep, {"x": simplex[0], "f": fs[0]})
    simplex, fs = order()
    spread = float(np.max(np.abs(np.asarray(fs) - fs[0])))
    return simplex[0], fs[0], spread < 1e-10


def run(ctx, writer, method="bfgs", n=5, iters=0):
    n, iters = int(n), int(iters)
    if method not in DEFAULT_ITERS:
        raise KernelError(f"unknown method {method!r}")
    if n < 2:
        raise KernelError(f"n must be >= 2, got {n}")
    if iters <= 0:
        iters = DEFAULT_ITERS[method]

    x0 = start_point(n)
    h = writer.begin_call(MODULE, "optimize",
                          {"method": method, "n": n, "iters": iters,
                           "x0": x0}, _SITE_MAIN)
    if method == "bfgs":
        x, f, converged = _bfgs(ctx, writer, x0, iters)
    else:
        x, f, converged = _nelder_mead(ctx, writer, x0, iters)
    writer.end_call(h, {"x": x, "f": f, "converged": converged})
    return {"x": x, "f": f, "converged": converged}
