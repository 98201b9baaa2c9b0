"""Polynomial least squares: normal equations vs Householder QR.

Fits a degree-d polynomial to exp(x) sampled on [0, 1] through a
Vandermonde system.  The normal-equations route squares the condition
number before the Cholesky solve, so its coefficients lose roughly
twice as many bits as the QR route under identical perturbation -- the
solver choice, not the problem, drives the difference.
"""

from __future__ import annotations

import numpy as np

from .. import mca
from .base import KernelError, here

MODULE = "kernels.lstsq"

_SITE_MAIN = here("run")
_SITE_SYSTEM = here("run")
_SITE_SOLVE = here("run")

_N_SAMPLES = 50


def _pmatmul(ctx, a, b):
    prods = mca.perturbed_op(ctx, "mul", a[:, None, :],
                             np.ascontiguousarray(b.T)[None, :, :])
    return np.asarray(mca.psum(ctx, np.asarray(prods)))


def _vandermonde(ctx, x, degree):
    cols = [np.ones_like(x)]
    for _ in range(degree):
        cols.append(np.asarray(mca.perturbed_op(ctx, "mul", cols[-1], x)))
    return np.stack(cols, axis=1)


def _back_substitute(ctx, r, rhs):
    n = len(rhs)
    beta = np.zeros(n)
    for i in range(n - 1, -1, -1):
        acc = rhs[i]
        if i < n - 1:
            dot = mca.pdot(ctx, r[i, i + 1:], beta[i + 1:])
            acc = mca.perturbed_op(ctx, "sub", acc, dot)
        beta[i] = mca.perturbed_op(ctx, "div", acc, r[i, i])
    return beta


def _forward_substitute(ctx, l, rhs):
    n = len(rhs)
    y = np.zeros(n)
    for i in range(n):
        acc = rhs[i]
        if i > 0:
            dot = mca.pdot(ctx, l[i, :i], y[:i])
            acc = mca.perturbed_op(ctx, "sub", acc, dot)
        y[i] = mca.perturbed_op(ctx, "div", acc, l[i, i])
    return y


def _cholesky(ctx, a):
    n = a.shape[0]
    l = np.zeros_like(a)
    for j in range(n):
        d = a[j, j]
        if j > 0:
            d = mca.perturbed_op(ctx, "sub", d,
                                 mca.pdot(ctx, l[j, :j], l[j, :j]))
        if not np.isfinite(d) or d <= 0.0:
            raise KernelError(
                f"normal-equations matrix lost positive definiteness at "
                f"column {j}")
        l[j, j] = mca.perturbed_op(ctx, "sqrt", d)
        if j + 1 < n:
            off = a[j + 1:, j]
            if j > 0:
                prods = mca.perturbed_op(ctx, "mul", l[j + 1:, :j],
                                         l[j, :j][None, :])
                off = mca.perturbed_op(ctx, "sub", off,
                                       mca.psum(ctx, np.asarray(prods)))
            l[j + 1:, j] = mca.perturbed_op(ctx, "div", off, l[j, j])
    return l


def _solve_normal_equations(ctx, v, y):
    vt = np.ascontiguousarray(v.T)
    gram = _pmatmul(ctx, vt, v)
    rhs = np.asarray(mca.pdot(ctx, vt, y))
    l = _cholesky(ctx, gram)
    z = _forward_substitute(ctx, l, rhs)
    beta = _back_substitute(ctx, np.ascontiguousarray(l.T), z)
    diag = np.abs(np.diag(l))
    cond_proxy = mca.perturbed_op(ctx, "div", float(diag.max()),
                                  float(diag.min()))
    return beta, cond_proxy


def _solve_qr(ctx, v, y):
    """Householder QR applied jointly to the matrix and the target."""
    a = v.copy()
    rhs = np.asarray(y, dtype=np.float64).copy()
    m, n = a.shape
    for j in range(n):
        col = a[j:, j]
        norm2 = mca.pdot(ctx, col, col)
        norm = mca.perturbed_op(ctx, "sqrt", norm2)
        if norm == 0.0:
            raise KernelError(f"rank-deficient column {j} in QR")
        alpha = -norm if col[0] >= 0.0 else norm
        u = col.copy()
        u[0] = mca.perturbed_op(ctx, "sub", u[0], alpha)
        unorm2 = mca.pdot(ctx, u, u)
        if unorm2 == 0.0:
            continue
        # apply H = I - 2 u u^T / (u^T u) to the trailing block and rhs
        block = a[j:, j:]
        proj = np.asarray(mca.pdot(ctx, np.ascontiguousarray(block.T), u))
        coef = mca.perturbed_op(
            ctx, "div", mca.perturbed_op(ctx, "mul", 2.0, proj), unorm2)
        a[j:, j:] = mca.perturbed_op(
            ctx, "sub", block,
            mca.perturbed_op(ctx, "mul", u[:, None], coef[None, :]))
        pr = mca.pdot(ctx, rhs[j:], u)
        cr = mca.perturbed_op(
            ctx, "div", mca.perturbed_op(ctx, "mul", 2.0, pr), unorm2)
        rhs[j:] = mca.perturbed_op(
            ctx, "sub", rhs[j:], mca.perturbed_op(ctx, "mul", cr, u))
    r = a[:n, :n]
    beta = _back_substitute(ctx, r, rhs[:n])
    diag = np.abs(np.diag(r))
    cond_proxy = mca.perturbed_op(ctx, "div", float(diag.max()),
                                  float(diag.min()))
    return beta, cond_proxy


def run(ctx, writer, solver="qr", degree=10):
    degree = int(degree)
    if solver not in ("qr", "normal_equations"):
        raise KernelError(f"unknown solver {solver!r}")
    if not 2 <= degree <= 12:
        raise KernelError(f"degree must be in [2, 12], got {degree}")

    h = writer.begin_call(MODULE, "lstsq",
                          {"solver": solver, "degree": degree}, _SITE_MAIN)

    h_sys = writer.begin_call(MODULE, "build_system",
                              {"degree": degree, "m": _N_SAMPLES},
                              _SITE_SYSTEM)
    idx = np.arange(_N_SAMPLES, dtype=np.float64)
    x = np.asarray(mca.perturbed_op(ctx, "div", idx, float(_N_SAMPLES - 1)))
    y = np.exp(x)
    v = _vandermonde(ctx, x, degree)
    writer.end_call(h_sys, {"x": x, "y": y})

    h_solve = writer.begin_call(MODULE, "solve", {"solver": solver},
                                _SITE_SOLVE)
    if solver == "qr":
        beta, cond_proxy = _solve_qr(ctx, v, y)
    else:
        beta, cond_proxy = _solve_normal_equations(ctx, v, y)
    fit = np.asarray(mca.pdot(ctx, v, beta))
    err = np.asarray(mca.perturbed_op(ctx, "sub", fit, y))
    residual = mca.psum(ctx, np.asarray(mca.perturbed_op(ctx, "mul", err, err)))
    writer.end_call(h_solve, {"coefficients": beta,
                              "cond_proxy": cond_proxy,
                              "residual": residual})

    writer.end_call(h, {"coefficients": beta, "residual": residual})
    return {"coefficients": beta, "cond_proxy": cond_proxy,
            "residual": residual}
