"""Stochastic floating-point engine.

Implements the inexact-noise model ``x + 2**(e_x - t) * xi`` with three
perturbation modes on top of native IEEE binary64:

* ``rr``   -- noise on operation outputs only; results that are exactly
  representable at the virtual precision are returned untouched, so the
  mode behaves like stochastic rounding.
* ``pb``   -- noise on operation inputs only; exposes catastrophic
  cancellation.
* ``mca``  -- both input and output noise.
* ``ieee`` -- no perturbation at all; bit-identical to native arithmetic.

Exactness under ``rr`` is witnessed by error-free transformations
(TwoSum for add/sub, Dekker TwoProd for mul, exact residuals for div and
sqrt).  All operations accept scalars or ndarrays and consume one xi
draw per output element per noise site, so the random stream advances
deterministically for a fixed operation sequence.

Perturbed inputs and intermediate results are carried as double-double
pairs (head + exact tail) so that sub-ulp noise survives until the final
rounding.  Rounding the noise away immediately would make virtual
precision 53 a no-op for binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Mode",
    "ArithContext",
    "exponent_of",
    "fork_stream",
    "inexact",
    "perturbed_op",
    "psum",
    "pdot",
]

_MASK64 = (1 << 64) - 1
_TWO_POW_53 = 1 << 53
_INV_2_53 = 2.0**-53
_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant

OPS = ("add", "sub", "mul", "div", "sqrt")


class Mode(str, Enum):
    IEEE = "ieee"
    RR = "rr"
    PB = "pb"
    MCA = "mca"


@dataclass
class ArithContext:
    """Deterministic perturbation context for one run.

    The xi stream is a pure function of ``(seed, run_index)`` via a
    Philox counter-based generator, so distinct run indices give
    independent streams and identical parameters replay bit-exactly.
    A context is single-threaded; parallel runs each fork their own.
    """

    mode: Mode
    t64: int = 53
    t32: int = 24
    seed: int = 0
    run_index: int = 0
    sqrt_clamps: int = 0
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if not 1 <= self.t64 <= 53:
            raise ValueError(f"t64 must be in [1, 53], got {self.t64}")
        if not 1 <= self.t32 <= 24:
            raise ValueError(f"t32 must be in [1, 24], got {self.t32}")
        key = np.array([self.seed & _MASK64, self.run_index & _MASK64],
                       dtype=np.uint64)
        self._rng = np.random.Generator(np.random.Philox(key=key))

    def uniform_open(self, shape=()) -> np.ndarray:
        """Draw xi uniform on the open interval (-1/2, 1/2).

        Built from 53 mantissa bits with the zero draw excluded, so both
        endpoints are unreachable and every value is an exact multiple
        of 2**-53.
        """
        u = self._rng.integers(1, _TWO_POW_53, size=shape, dtype=np.int64)
        return u * _INV_2_53 - 0.5

    def precision_for(self, single: bool = False) -> int:
        return self.t32 if single else self.t64


def fork_stream(ctx: ArithContext, run_index: int) -> ArithContext:
    """Independent context whose stream depends only on (seed, run_index)."""
    if run_index < 0:
        raise ValueError(f"run_index must be >= 0, got {run_index}")
    return ArithContext(mode=ctx.mode, t64=ctx.t64, t32=ctx.t32,
                        seed=ctx.seed, run_index=run_index)


def exponent_of(x):
    """Magnitude exponent e with |x| / 2**e in [1/2, 1).

    Precondition: x finite and nonzero (callers mask zeros and
    non-finite values before getting here).  Subnormals use their
    effective exponent.
    """
    if np.isscalar(x) or np.ndim(x) == 0:
        return math.frexp(float(x))[1]
    return np.frexp(np.asarray(x, dtype=np.float64))[1]


# -- error-free transformations (vectorized) --------------------------------

def _two_sum(a, b):
    """Knuth TwoSum: s + e == a + b exactly, s = fl(a + b)."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    """Dekker TwoProd: p + e == a * b exactly (absent overflow)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _representable(r, t: int) -> np.ndarray:
    """True where r fits in a t-bit significand."""
    m, e = np.frexp(r)
    y = np.ldexp(r, t - e)
    return np.trunc(y) == y


def _noise(ctx: ArithContext, x, t: int):
    """Fresh noise 2**(e_x - t) * xi, zero where x is 0 or non-finite.

    Always consumes one xi per element so the stream position depends
    only on shapes, not values.
    """
    xi = ctx.uniform_open(np.shape(x))
    ok = np.isfinite(x) & (x != 0.0)
    e = np.frexp(np.where(ok, x, 1.0))[1]
    return np.where(ok, np.ldexp(xi, e - t), 0.0)


def inexact(ctx: ArithContext, x, t: int | None = None):
    """Perturb x by 2**(e_x - t) * xi; 0, inf and NaN pass through.

    The returned binary64 is the rounding of the real perturbed value;
    a guard keeps noise from ever flushing a nonzero value to zero.
    """
    scalar = np.isscalar(x) or np.ndim(x) == 0
    arr = np.asarray(x, dtype=np.float64)
    if t is None:
        t = ctx.t64
    out = arr + _noise(ctx, arr, t)
    out = np.where((out == 0.0) & (arr != 0.0), arr, out)
    return float(out) if scalar else out


# -- double-double op kernels ------------------------------------------------
# Each returns (head, tail) with head + tail equal to the exact result of
# the native operation applied to the exact input pairs, up to terms of
# order 2**-106 that are irrelevant next to the injected noise.

def _dd_addsub(ah, at, bh, bt):
    s, e = _two_sum(ah, bh)
    return _two_sum(s, e + (at + bt))


def _dd_mul(ah, at, bh, bt):
    p, e = _two_prod(ah, bh)
    return _two_sum(p, e + (ah * bt + at * bh))


def _dd_div(ah, at, bh, bt):
    with np.errstate(divide="ignore", invalid="ignore"):
        q = ah / bh
        p, pe = _two_prod(q, bh)
        num = ((ah - p) - pe) + (at - q * bt)
        return _two_sum(q, num / bh)


def _dd_sqrt(ah, at):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(ah)
        p, pe = _two_prod(r, r)
        tail = np.where(ah == 0.0, 0.0, (((ah - p) - pe) + at) / (2.0 * r))
        return _two_sum(r, tail)


def _native(op: str, a, b):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        if op == "div":
            return a / b
        if op == "sqrt":
            return np.sqrt(a)
    raise ValueError(f"unknown op {op!r}")


def perturbed_op(ctx: ArithContext, op: str, a, b=None, *, single: bool = False):
    """Apply one arithmetic operation under the context's mode.

    ``ieee`` returns the native result bit-identically.  ``pb`` perturbs
    the inputs, ``rr`` the output (only when the exact result is not
    representable at the virtual precision), ``mca`` both.  NaN and inf
    follow native semantics unperturbed.  Scalar inputs give a scalar.
    """
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}; expected one of {OPS}")
    unary = op == "sqrt"
    if not unary and b is None:
        raise ValueError(f"op {op!r} needs two operands")
    scalar = (np.isscalar(a) or np.ndim(a) == 0) and (
        unary or np.isscalar(b) or np.ndim(b) == 0)
    a = np.asarray(a, dtype=np.float64)
    if not unary:
        b = np.asarray(b, dtype=np.float64)
        a, b = np.broadcast_arrays(a, b)

    mode = ctx.mode
    nat = _native(op, a, b)
    if mode is Mode.IEEE:
        out = nat
        if single:
            out = out.astype(np.float32).astype(np.float64)
        return float(out) if scalar else np.array(out)

    t = ctx.precision_for(single)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zero = np.zeros_like(a)
        if mode in (Mode.PB, Mode.MCA):
            ah, at = _two_sum(a, _noise(ctx, a, t))
            if not unary:
                bh, bt = _two_sum(b, _noise(ctx, b, t))
        else:
            ah, at = a, zero
            if not unary:
                bh, bt = b, zero

        if op == "sqrt":
            clamped = (ah < 0.0) & (a >= 0.0)
            if clamped.any():
                ctx.sqrt_clamps += int(np.count_nonzero(clamped))
                ah = np.where(clamped, 0.0, ah)
                at = np.where(clamped, 0.0, at)
            rh, rt = _dd_sqrt(ah, at)
        elif op in ("add", "sub"):
            sign = -1.0 if op == "sub" else 1.0
            rh, rt = _dd_addsub(ah, at, sign * bh, sign * bt)
        elif op == "mul":
            rh, rt = _dd_mul(ah, at, bh, bt)
        else:
            rh, rt = _dd_div(ah, at, bh, bt)

        if mode is Mode.PB:
            out = rh + rt
        else:
            exact = rt == 0.0
            if t < 53:
                exact &= _representable(rh, t)
            out = np.where(exact, rh, rh + (rt + _noise(ctx, rh, t)))

        out = np.where(np.isfinite(nat), out, nat)
    if single:
        out = out.astype(np.float32).astype(np.float64)
    return float(out) if scalar else out


def psum(ctx: ArithContext, x, *, single: bool = False):
    """Perturbed pairwise-tree sum along the last axis.

    Every partial addition goes through :func:`perturbed_op`, so the
    reduction picks up one noise site per tree node.  Odd-length levels
    carry their last column unchanged.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] == 0:
        return np.zeros(arr.shape[:-1])
    while arr.shape[-1] > 1:
        n = arr.shape[-1]
        half = n // 2
        left = arr[..., :half]
        right = arr[..., half:2 * half]
        merged = perturbed_op(ctx, "add", left, right, single=single)
        merged = np.asarray(merged, dtype=np.float64).reshape(left.shape)
        if n % 2:
            merged = np.concatenate([merged, arr[..., -1:]], axis=-1)
        arr = merged
    out = arr[..., 0]
    return float(out) if out.ndim == 0 else out


def pdot(ctx: ArithContext, a, b, *, single: bool = False):
    """Perturbed dot product along the last axis."""
    prods = perturbed_op(ctx, "mul", a, b, single=single)
    return psum(ctx, np.asarray(prods, dtype=np.float64), single=single)
