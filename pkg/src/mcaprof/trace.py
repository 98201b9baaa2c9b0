"""Call-granularity trace recording and playback.

A trace file is newline-delimited JSON, UTF-8: one header object on the
first line, then one event object per line.  Field order is fixed so a
given run serializes byte-identically.  Floats are written with their
shortest round-trip repr, which makes the write/read cycle bit-exact.

Events come in input/output pairs under strict stack discipline: every
output closes the most recent open input of the same call, and the
event counter increases by one per record across the whole file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Frame",
    "ValueSlot",
    "CallEvent",
    "TraceHeader",
    "CallHandle",
    "TraceWriter",
    "NullWriter",
    "TraceData",
    "TraceError",
    "CorruptTraceError",
    "flatten_value",
    "open_trace",
    "read_trace",
]

_DTYPES = ("f64", "f32", "i64", "bool")


class TraceError(Exception):
    """I/O or usage failure while producing or consuming a trace."""


class CorruptTraceError(TraceError):
    """Structural invariant violated (ordering, pairing, encoding)."""


@dataclass(frozen=True)
class Frame:
    file: str
    line: int
    fn: str

    def to_obj(self):
        return {"file": self.file, "line": self.line, "fn": self.fn}


@dataclass
class ValueSlot:
    """One flattened numeric leaf: dotted path, dtype, shape, payload."""

    path: str
    dtype: str
    shape: tuple[int, ...]
    data: list

    def to_numpy(self) -> np.ndarray:
        np_dtype = {"f64": np.float64, "f32": np.float32,
                    "i64": np.int64, "bool": np.bool_}[self.dtype]
        return np.asarray(self.data, dtype=np_dtype).reshape(self.shape)

    def to_obj(self):
        return {"path": self.path, "dtype": self.dtype,
                "shape": list(self.shape), "data": self.data}


@dataclass
class CallEvent:
    kind: str  # "input" | "output"
    counter: int
    depth: int
    module: str
    function: str
    backtrace: tuple[Frame, ...]
    values: list[ValueSlot]

    def to_obj(self):
        return {
            "kind": self.kind,
            "counter": self.counter,
            "depth": self.depth,
            "module": self.module,
            "function": self.function,
            "backtrace": [f.to_obj() for f in self.backtrace],
            "values": [v.to_obj() for v in self.values],
        }


@dataclass
class TraceHeader:
    run_id: str
    seed: int
    run_index: int
    mode: str
    t64: int
    t32: int
    kernel: str
    params: dict
    version: int = 1

    def to_obj(self):
        return {
            "version": self.version,
            "run_id": self.run_id,
            "seed": self.seed,
            "run_index": self.run_index,
            "mode": self.mode,
            "t64": self.t64,
            "t32": self.t32,
            "kernel": self.kernel,
            "params": self.params,
        }


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


# -- value flattening --------------------------------------------------------

def _slot_dtype(arr: np.ndarray) -> str | None:
    if arr.dtype == np.bool_:
        return "bool"
    if arr.dtype == np.float32:
        return "f32"
    if np.issubdtype(arr.dtype, np.floating):
        return "f64"
    if np.issubdtype(arr.dtype, np.integer):
        return "i64"
    return None


def _payload(arr: np.ndarray, dtype: str) -> list:
    flat = arr.ravel(order="C")
    if dtype == "bool":
        return [bool(v) for v in flat]
    if dtype == "i64":
        return [int(v) for v in flat.astype(np.int64)]
    if dtype == "f32":
        return [float(v) for v in flat.astype(np.float32).astype(np.float64)]
    return [float(v) for v in flat.astype(np.float64)]


def flatten_value(v) -> tuple[list[ValueSlot], int]:
    """Depth-first flattening of a structured value into numeric slots.

    Whole numeric ndarrays stay as one slot; dicts recurse on field
    names, heterogeneous sequences on index segments.  Non-numeric
    leaves are dropped and tallied, never fatal.  Returns
    ``(slots, dropped_count)``.
    """
    slots: list[ValueSlot] = []
    dropped = 0
    seen: set[str] = set()

    def emit(path: str, arr: np.ndarray):
        dtype = _slot_dtype(arr)
        if dtype is None:
            nonlocal dropped
            dropped += 1
            return
        if path in seen:
            raise ValueError(f"duplicate slot path {path!r} in one event")
        seen.add(path)
        slots.append(ValueSlot(path=path, dtype=dtype,
                               shape=tuple(arr.shape),
                               data=_payload(arr, dtype)))

    def join(prefix: str, seg: str) -> str:
        return f"{prefix}.{seg}" if prefix else seg

    def walk(path: str, v):
        nonlocal dropped
        if v is None or isinstance(v, (str, bytes)):
            dropped += 1
            return
        if isinstance(v, (bool, np.bool_)):
            emit(path, np.asarray(v, dtype=np.bool_))
            return
        if isinstance(v, (int, np.integer)):
            emit(path, np.asarray(v, dtype=np.int64))
            return
        if isinstance(v, np.float32):
            emit(path, np.asarray(v, dtype=np.float32))
            return
        if isinstance(v, (float, np.floating)):
            emit(path, np.asarray(v, dtype=np.float64))
            return
        if isinstance(v, np.ndarray):
            if _slot_dtype(v) is None:
                dropped += 1
            else:
                emit(path, v)
            return
        if isinstance(v, dict):
            for k, item in v.items():
                walk(join(path, str(k)), item)
            return
        if isinstance(v, (list, tuple)):
            arr = None
            try:
                arr = np.asarray(v)
            except (ValueError, TypeError):
                arr = None
            if arr is not None and _slot_dtype(arr) is not None:
                emit(path, arr)
                return
            for i, item in enumerate(v):
                walk(join(path, str(i)), item)
            return
        dropped += 1

    walk("", v)
    return slots, dropped


# -- writing -----------------------------------------------------------------

@dataclass(frozen=True)
class CallHandle:
    counter: int
    depth: int
    module: str
    function: str
    backtrace: tuple[Frame, ...]


class TraceWriter:
    """Sequential trace emitter for a single run (single-threaded)."""

    def __init__(self, path: str, header: TraceHeader):
        self.path = path
        self.header = header
        self._counter = 0
        self._stack: list[CallHandle] = []
        self.dropped_values = 0
        self.corrupt = False
        try:
            self._fh = open(path, "w", encoding="utf-8", newline="\n")
        except OSError as exc:
            raise TraceError(f"cannot open trace file {path!r}: {exc}") from exc
        self._fh.write(_dumps(header.to_obj()) + "\n")

    def begin_call(self, module: str, function: str, args,
                   backtrace: tuple[Frame, ...] = ()) -> CallHandle:
        slots, dropped = flatten_value(args)
        self.dropped_values += dropped
        handle = CallHandle(counter=self._counter, depth=len(self._stack),
                            module=module, function=function,
                            backtrace=tuple(backtrace))
        self._emit(CallEvent(kind="input", counter=self._counter,
                             depth=handle.depth, module=module,
                             function=function, backtrace=handle.backtrace,
                             values=slots))
        self._stack.append(handle)
        return handle

    def end_call(self, handle: CallHandle, outputs) -> None:
        if not self._stack or self._stack[-1] is not handle:
            self.corrupt = True
            raise CorruptTraceError(
                f"out-of-order end_call for {handle.module}.{handle.function} "
                f"(input counter {handle.counter}) in {self.path!r}")
        slots, dropped = flatten_value(outputs)
        self.dropped_values += dropped
        self._emit(CallEvent(kind="output", counter=self._counter,
                             depth=handle.depth, module=handle.module,
                             function=handle.function,
                             backtrace=handle.backtrace, values=slots))
        self._stack.pop()

    def _emit(self, event: CallEvent) -> None:
        self._fh.write(_dumps(event.to_obj()) + "\n")
        self._counter += 1

    def close(self) -> None:
        if self._fh.closed:
            return
        try:
            if self._stack and not self.corrupt:
                self.corrupt = True
                raise CorruptTraceError(
                    f"{len(self._stack)} unclosed call(s) at close of {self.path!r}")
        finally:
            self._fh.close()

    def abort(self) -> None:
        """Close without stack checks; used when a kernel run fails."""
        self.corrupt = True
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self.abort()
        return False


class NullWriter:
    """Drop-in writer that records nothing; for statistics-only runs."""

    def __init__(self):
        self.dropped_values = 0
        self.corrupt = False
        self._stack: list[CallHandle] = []
        self._counter = 0

    def begin_call(self, module, function, args, backtrace=()):
        handle = CallHandle(counter=self._counter, depth=len(self._stack),
                            module=module, function=function,
                            backtrace=tuple(backtrace))
        self._counter += 1
        self._stack.append(handle)
        return handle

    def end_call(self, handle, outputs):
        self._counter += 1
        self._stack.pop()

    def close(self):
        pass

    def abort(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        return False


def open_trace(path: str, header: TraceHeader) -> TraceWriter:
    """Create (or truncate) a trace file and position it for events."""
    return TraceWriter(path, header)


# -- reading -----------------------------------------------------------------

@dataclass
class TraceData:
    header: TraceHeader
    events: list[CallEvent]
    path: str = ""

    def paired_intervals(self):
        """(input_event, output_event) pairs in input order."""
        stack: list[CallEvent] = []
        pairs: dict[int, tuple[CallEvent, CallEvent]] = {}
        for ev in self.events:
            if ev.kind == "input":
                stack.append(ev)
            else:
                start = stack.pop()
                pairs[start.counter] = (start, ev)
        return [pairs[k] for k in sorted(pairs)]


def _parse_header(obj, path: str) -> TraceHeader:
    try:
        return TraceHeader(
            version=obj["version"], run_id=obj["run_id"], seed=obj["seed"],
            run_index=obj["run_index"], mode=obj["mode"], t64=obj["t64"],
            t32=obj["t32"], kernel=obj["kernel"], params=obj["params"])
    except (KeyError, TypeError) as exc:
        raise CorruptTraceError(f"malformed header in {path!r}: {exc}") from exc


def _parse_event(obj, path: str, index: int) -> CallEvent:
    try:
        values = []
        for vo in obj["values"]:
            if vo["dtype"] not in _DTYPES:
                raise CorruptTraceError(
                    f"unknown dtype {vo['dtype']!r} at record {index} of {path!r}")
            shape = tuple(int(s) for s in vo["shape"])
            n = 1
            for s in shape:
                n *= s
            if n != len(vo["data"]):
                raise CorruptTraceError(
                    f"shape/payload mismatch at record {index} of {path!r}: "
                    f"shape {shape} vs {len(vo['data'])} values")
            values.append(ValueSlot(path=vo["path"], dtype=vo["dtype"],
                                    shape=shape, data=vo["data"]))
        return CallEvent(
            kind=obj["kind"], counter=obj["counter"], depth=obj["depth"],
            module=obj["module"], function=obj["function"],
            backtrace=tuple(Frame(f["file"], f["line"], f["fn"])
                            for f in obj["backtrace"]),
            values=values)
    except (KeyError, TypeError) as exc:
        raise CorruptTraceError(
            f"malformed event at record {index} of {path!r}: {exc}") from exc


def read_trace(path: str) -> TraceData:
    """Read and validate a trace file.

    Checks monotone counters and input/output stack discipline; any
    violation or undecodable record raises :class:`CorruptTraceError`
    with the byte offset and record index of the failure.
    """
    if not os.path.exists(path):
        raise TraceError(f"no such trace file: {path!r}")
    header: TraceHeader | None = None
    events: list[CallEvent] = []
    stack: list[CallEvent] = []
    last_counter = -1
    offset = 0
    with open(path, "rb") as fh:
        for index, raw in enumerate(fh):
            try:
                obj = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise CorruptTraceError(
                    f"undecodable record {index} at byte offset {offset} of "
                    f"{path!r} (last valid counter {last_counter}): {exc}"
                ) from exc
            if index == 0:
                header = _parse_header(obj, path)
            else:
                ev = _parse_event(obj, path, index)
                if ev.counter != last_counter + 1:
                    raise CorruptTraceError(
                        f"counter regression at record {index} (byte offset "
                        f"{offset}) of {path!r}: got {ev.counter} after "
                        f"{last_counter}")
                if ev.kind == "input":
                    if ev.depth != len(stack):
                        raise CorruptTraceError(
                            f"depth {ev.depth} != stack depth {len(stack)} at "
                            f"record {index} of {path!r}")
                    stack.append(ev)
                elif ev.kind == "output":
                    if not stack:
                        raise CorruptTraceError(
                            f"output without open input at record {index} of "
                            f"{path!r}")
                    top = stack.pop()
                    if (top.module, top.function) != (ev.module, ev.function):
                        raise CorruptTraceError(
                            f"output {ev.module}.{ev.function} does not match "
                            f"open input {top.module}.{top.function} at record "
                            f"{index} of {path!r}")
                    if ev.depth != top.depth:
                        raise CorruptTraceError(
                            f"output depth {ev.depth} != input depth "
                            f"{top.depth} at record {index} of {path!r}")
                else:
                    raise CorruptTraceError(
                        f"unknown event kind {ev.kind!r} at record {index} of "
                        f"{path!r}")
                last_counter = ev.counter
                events.append(ev)
            offset += len(raw)
    if header is None:
        raise CorruptTraceError(f"empty trace file {path!r}")
    if stack:
        raise CorruptTraceError(
            f"{len(stack)} unclosed call(s) at end of {path!r} "
            f"(last valid counter {last_counter})")
    return TraceData(header=header, events=events, path=path)
