"""Shared plumbing for instrumented kernels."""

from __future__ import annotations

import inspect
import os

from ..trace import Frame

_PKG_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class KernelError(Exception):
    """Invalid kernel parameters or a failed kernel-side invariant."""


def here(fn: str) -> tuple[Frame, ...]:
    """Single-frame backtrace for the instrumentation site at this line.

    Captured at import time of the kernel module, so every run of a
    kernel reports the same (file, line, caller) triple.  Paths are
    stored relative to the package root for the source-view endpoint.
    """
    caller = inspect.stack()[1]
    rel = os.path.relpath(caller.filename, _PKG_ROOT)
    return (Frame(file=rel.replace(os.sep, "/"), line=caller.lineno, fn=fn),)
