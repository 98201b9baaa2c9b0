"""Instrumented kernel registry.

Each kernel is a function ``run(ctx, writer, **params)`` that does all
floating-point work through the perturbed-op layer and brackets its
public phases with begin/end trace calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import arange, dft, hyperplane, interp, lstsq, newton, optimize
from .base import KernelError

__all__ = ["KernelSpec", "KernelError", "REGISTRY", "get_kernel",
           "coerce_params"]


@dataclass(frozen=True)
class KernelSpec:
    name: str
    description: str
    params: dict
    functions: tuple[str, ...]
    run: Callable

    def resolve(self, overrides: dict) -> dict:
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise KernelError(
                f"unknown parameter(s) {sorted(unknown)} for kernel "
                f"{self.name!r}; available: {sorted(self.params)}")
        merged = dict(self.params)
        merged.update(overrides)
        return merged


REGISTRY: dict[str, KernelSpec] = {}


def _register(spec: KernelSpec) -> None:
    if spec.name in REGISTRY:
        raise ValueError(f"duplicate kernel name {spec.name!r}")
    REGISTRY[spec.name] = spec


_register(KernelSpec(
    name="arange",
    description="equally spaced array with a float-typed length (ceil bug)",
    params={"start": 0.0, "stop": 600.0, "step": 1.0},
    functions=("arange", "compute_length", "fill"),
    run=arange.run))

_register(KernelSpec(
    name="dft",
    description="naive O(n^2) DFT of a two-tone signal",
    params={"n": 600},
    functions=("dft", "build_signal", "spectrum"),
    run=dft.run))

_register(KernelSpec(
    name="interp1d",
    description="linear/cubic interpolation of cos(-x^2/9) on [0, 10]",
    params={"n_knots": 11, "method": "linear", "n_eval": 41},
    functions=("interp1d", "build_knots", "evaluate"),
    run=interp.run))

_register(KernelSpec(
    name="rosenbrock_opt",
    description="Rosenbrock minimization (bfgs or nelder_mead), fixed budget",
    params={"method": "bfgs", "n": 5, "iters": 0},
    functions=("optimize", "step"),
    run=optimize.run))

_register(KernelSpec(
    name="newton_root",
    description="Newton iteration on x^3 - 2x - 5 (strict or fixed stop)",
    params={"threshold_mode": "fixed_iters", "x0": 2.0, "tol": 1e-12,
            "fixed_iters": 8},
    functions=("newton", "step"),
    run=newton.run))

_register(KernelSpec(
    name="lstsq",
    description="polynomial fit via normal equations or Householder QR",
    params={"solver": "qr", "degree": 10},
    functions=("lstsq", "build_system", "solve"),
    run=lstsq.run))

_register(KernelSpec(
    name="unstable_branch",
    description="sign(w.x + b) on a grid with an engineered unstable stripe",
    params={"w0": hyperplane._DEFAULT_W0, "w1": hyperplane._DEFAULT_W1,
            "grid_n": 50, "pivot_col": -1, "use_auto_b": 1, "b": 1.0},
    functions=("classify_grid", "score_grid", "label_grid"),
    run=hyperplane.run))


def get_kernel(name: str) -> KernelSpec:
    if name not in REGISTRY:
        known = ", ".join(sorted(REGISTRY))
        raise KernelError(f"unknown kernel {name!r}; registered: {known}")
    return REGISTRY[name]


def coerce_params(spec: KernelSpec, raw: dict[str, str]) -> dict:
    """Coerce CLI ``k=v`` strings using the default value's type."""
    out: dict = {}
    for key, val in raw.items():
        if key not in spec.params:
            raise KernelError(
                f"unknown parameter {key!r} for kernel {spec.name!r}; "
                f"available: {sorted(spec.params)}")
        default = spec.params[key]
        if isinstance(default, str):
            out[key] = val
        elif isinstance(default, int) and not isinstance(default, bool):
            try:
                out[key] = int(val)
            except ValueError as exc:
                raise KernelError(f"parameter {key!r} expects an integer, "
                                  f"got {val!r}") from exc
        else:
            try:
                out[key] = float(val)
            except ValueError as exc:
                raise KernelError(f"parameter {key!r} expects a number, "
                                  f"got {val!r}") from exc
    return out
