"""Tests for trace recording, flattening, and playback."""

import json
import os

import numpy as np
import pytest

from mcaprof.trace import (CorruptTraceError, Frame, TraceError, TraceHeader,
                           flatten_value, open_trace, read_trace)


def _header(**kw):
    base = dict(run_id="test-r0", seed=1, run_index=0, mode="rr", t64=53,
                t32=24, kernel="unit", params={"p": 1})
    base.update(kw)
    return TraceHeader(**base)


def _reference_flatten(v, prefix=""):
    """Independent recursive flattener used as the oracle."""
    out = {}

    def join(p, s):
        return f"{p}.{s}" if p else s

    if isinstance(v, dict):
        for k, item in v.items():
            out.update(_reference_flatten(item, join(prefix, str(k))))
    elif isinstance(v, (list, tuple)) and not all(
            isinstance(x, (int, float, bool, np.number)) for x in v):
        for i, item in enumerate(v):
            out.update(_reference_flatten(item, join(prefix, str(i))))
    elif isinstance(v, (int, float, bool, np.number, np.ndarray, list, tuple)):
        out[prefix] = np.asarray(v)
    return out


# -- flattening ---------------------------------------------------------------

def test_flatten_bare_scalar():
    slots, dropped = flatten_value(5.0)
    assert dropped == 0
    assert len(slots) == 1
    assert slots[0].path == "" and slots[0].dtype == "f64"
    assert slots[0].shape == () and slots[0].data == [5.0]


def test_flatten_nested_record_matches_oracle():
    value = {"a": 2.0, "b": {"c": [1.0, 2.0]}}
    slots, dropped = flatten_value(value)
    ref = _reference_flatten(value)
    assert dropped == 0
    assert {s.path for s in slots} == set(ref) == {"a", "b.c"}
    for s in slots:
        assert np.array_equal(s.to_numpy(), ref[s.path])
    by_path = {s.path: s for s in slots}
    assert by_path["a"].shape == ()
    assert by_path["b.c"].shape == (2,)


def test_flatten_matrix_kept_whole():
    m = np.arange(6, dtype=np.float64).reshape(2, 3)
    slots, dropped = flatten_value(m)
    assert dropped == 0 and len(slots) == 1
    assert slots[0].shape == (2, 3) and len(slots[0].data) == 6
    assert np.array_equal(slots[0].to_numpy(), m)


def test_flatten_drops_non_numeric_with_tally():
    slots, dropped = flatten_value({"w": np.eye(2), "label": "abc"})
    assert len(slots) == 1 and slots[0].path == "w"
    assert dropped == 1


def test_flatten_sequence_of_records():
    slots, _ = flatten_value({"items": [{"x": 1.0}, {"x": 2.0}]})
    assert {s.path for s in slots} == {"items.0.x", "items.1.x"}


def test_flatten_dtypes():
    slots, _ = flatten_value({"f": 1.5, "i": 7, "b": True,
                              "g": np.float32(2.5),
                              "ai": np.array([1, 2], dtype=np.int32),
                              "ab": np.array([True, False])})
    d = {s.path: s.dtype for s in slots}
    assert d == {"f": "f64", "i": "i64", "b": "bool", "g": "f32",
                 "ai": "i64", "ab": "bool"}


def test_flatten_drops_none_and_objects():
    class Thing:
        pass

    slots, dropped = flatten_value({"a": None, "b": Thing(), "c": 3.0})
    assert [s.path for s in slots] == ["c"]
    assert dropped == 2


# -- writing and reading --------------------------------------------------------

def test_header_only_roundtrip(tmp_path):
    path = str(tmp_path / "t.jsonl")
    open_trace(path, _header()).close()
    with open(path) as fh:
        lines = fh.readlines()
    assert len(lines) == 1
    data = read_trace(path)
    assert data.header.kernel == "unit" and data.events == []


def test_reopen_truncates(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    h = w.begin_call("m", "f", 1.0)
    w.end_call(h, 2.0)
    w.close()
    open_trace(path, _header()).close()
    assert read_trace(path).events == []


def test_unwritable_path_errors_with_path():
    bad = "/nonexistent-dir-xyz/trace.jsonl"
    with pytest.raises(TraceError, match="nonexistent-dir-xyz"):
        open_trace(bad, _header())


def test_counters_and_depths_sequential(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    h1 = w.begin_call("m", "f", 1.0)
    w.end_call(h1, 2.0)
    h2 = w.begin_call("m", "g", 3.0)
    w.end_call(h2, 4.0)
    w.close()
    ev = read_trace(path).events
    assert [e.counter for e in ev] == [0, 1, 2, 3]
    assert [e.depth for e in ev] == [0, 0, 0, 0]
    assert [e.kind for e in ev] == ["input", "output", "input", "output"]


def test_nested_depths(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    outer = w.begin_call("m", "outer", 1.0)
    inner = w.begin_call("m", "inner", 2.0)
    w.end_call(inner, 3.0)
    w.end_call(outer, 4.0)
    w.close()
    ev = read_trace(path).events
    assert [(e.kind, e.depth) for e in ev] == [
        ("input", 0), ("input", 1), ("output", 1), ("output", 0)]
    pairs = read_trace(path).paired_intervals()
    (s0, e0), (s1, e1) = pairs
    assert s0.counter < s1.counter < e1.counter < e0.counter


def test_out_of_order_end_is_hard_error(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    outer = w.begin_call("m", "outer", 1.0)
    w.begin_call("m", "inner", 2.0)
    with pytest.raises(CorruptTraceError):
        w.end_call(outer, 0.0)
    assert w.corrupt
    w.abort()


def test_roundtrip_structural_equality(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    h = w.begin_call("m", "f", {"x": [0.1, 2.0**-1074, 1e308], "n": 7},
                     backtrace=(Frame("k.py", 12, "caller"),))
    w.end_call(h, {"y": np.array([[1.5, -0.25], [3.0, 0.1]])})
    w.close()
    data = read_trace(path)
    assert data.events[0].backtrace == (Frame("k.py", 12, "caller"),)
    got = data.events[1].values[0].to_numpy()
    assert np.array_equal(got, np.array([[1.5, -0.25], [3.0, 0.1]]))


def test_numeric_fidelity_bit_exact(tmp_path):
    tricky = [0.1, 1.0 / 3.0, 2.0**-1074, 5e-324, 1e308, -1e-310,
              1.0 + 2.0**-52, 600.0000000000001]
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    h = w.begin_call("m", "f", np.array(tricky))
    w.end_call(h, np.float32(0.1))
    w.close()
    data = read_trace(path)
    back = data.events[0].values[0].to_numpy()
    assert back.tobytes() == np.array(tricky).tobytes()
    f32 = data.events[1].values[0].to_numpy()
    assert f32.dtype == np.float32 and f32 == np.float32(0.1)


def test_write_read_write_byte_identical(tmp_path):
    p1 = str(tmp_path / "a.jsonl")
    p2 = str(tmp_path / "b.jsonl")
    w = open_trace(p1, _header())
    h = w.begin_call("m", "f", {"x": [0.1, 0.2, 0.30000000000000004]},
                     backtrace=(Frame("k.py", 3, "run"),))
    w.end_call(h, 1e-300)
    w.close()
    data = read_trace(p1)
    w2 = open_trace(p2, data.header)
    for ev_in, ev_out in data.paired_intervals():
        hh = w2.begin_call(ev_in.module, ev_in.function,
                           {v.path: v.to_numpy() for v in ev_in.values},
                           backtrace=ev_in.backtrace)
        w2.end_call(hh, ev_out.values[0].to_numpy())
    w2.close()
    with open(p1, "rb") as fh:
        b1 = fh.read()
    with open(p2, "rb") as fh:
        b2 = fh.read()
    assert b1 == b2


def test_counter_regression_detected(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    for fn in ("f", "g"):
        h = w.begin_call("m", fn, 1.0)
        w.end_call(h, 2.0)
    w.close()
    lines = open(path).read().splitlines()
    # swap counters 2 and 1 -> regression
    e1 = json.loads(lines[2])
    e2 = json.loads(lines[3])
    e1["counter"], e2["counter"] = 2, 1
    lines[2] = json.dumps(e1, separators=(",", ":"))
    lines[3] = json.dumps(e2, separators=(",", ":"))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with pytest.raises(CorruptTraceError, match="counter"):
        read_trace(path)


def test_truncated_final_record(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    h = w.begin_call("m", "f", 1.0)
    w.end_call(h, 2.0)
    w.close()
    raw = open(path, "rb").read()
    with open(path, "wb") as fh:
        fh.write(raw[:-20])  # chop into the last record
    with pytest.raises(CorruptTraceError, match="last valid counter 0"):
        read_trace(path)


def test_unclosed_call_detected_on_read(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    w.begin_call("m", "f", 1.0)
    w.abort()  # leaves an unmatched input behind
    with pytest.raises(CorruptTraceError, match="unclosed"):
        read_trace(path)


def test_missing_file():
    with pytest.raises(TraceError, match="no-such"):
        read_trace("no-such-trace.jsonl")


def test_writer_close_with_open_calls_raises(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    w.begin_call("m", "f", 1.0)
    with pytest.raises(CorruptTraceError, match="unclosed"):
        w.close()


def test_dropped_values_tallied_per_trace(tmp_path):
    path = str(tmp_path / "t.jsonl")
    w = open_trace(path, _header())
    h = w.begin_call("m", "f", {"x": 1.0, "note": "hi"})
    w.end_call(h, {"y": 2.0, "extra": None})
    w.close()
    assert w.dropped_values == 2
