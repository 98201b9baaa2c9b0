"""End-to-end CLI tests: run, aggregate, report, serve."""

import json
import os
import urllib.error
import urllib.request

import pytest

from mcaprof.cli import main
from mcaprof.serve import make_server


def _files(d):
    return {n: open(os.path.join(d, n), "rb").read()
            for n in sorted(os.listdir(d))}


def test_run_writes_traces_and_manifest(tmp_path, capsys):
    out = str(tmp_path / "runs")
    rc = main(["run", "--kernel", "arange", "--mode", "rr", "--seed", "3",
               "--samples", "5", "--out", out])
    assert rc == 0
    names = sorted(os.listdir(out))
    assert names == ["manifest.json"] + [f"trace-{i:04d}.jsonl"
                                         for i in range(5)]
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert [s["status"] for s in manifest["statuses"]] == ["success"] * 5
    assert {s["run_index"] for s in manifest["statuses"]} == set(range(5))


def test_run_repeat_is_byte_identical(tmp_path):
    out1 = str(tmp_path / "a")
    out2 = str(tmp_path / "b")
    args = ["run", "--kernel", "newton_root", "--mode", "rr", "--seed", "9",
            "--samples", "3"]
    assert main(args + ["--out", out1]) == 0
    assert main(args + ["--out", out2]) == 0
    f1, f2 = _files(out1), _files(out2)
    assert set(f1) == set(f2)
    for name in f1:
        if name.startswith("trace-"):
            assert f1[name] == f2[name], name


def test_run_param_out_of_range_records_kernel_error(tmp_path, capsys):
    out = str(tmp_path / "runs")
    rc = main(["run", "--kernel", "lstsq", "--param", "degree=99",
               "--samples", "2", "--out", out])
    assert rc == 3  # zero successful runs
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert all(s["status"] == "kernel_error" for s in manifest["statuses"])


def test_run_unknown_kernel_lists_registry(tmp_path, capsys):
    rc = main(["run", "--kernel", "nope", "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "arange" in err and "dft" in err


def test_run_unknown_param_is_usage_error(tmp_path, capsys):
    rc = main(["run", "--kernel", "arange", "--param", "bogus=1",
               "--out", str(tmp_path)])
    assert rc == 2


def _pipeline(tmp_path, kernel="arange", mode="rr", seed=3, samples=5,
              t64=53, params=()):
    out = str(tmp_path / "runs")
    summary = str(tmp_path / "summary.json")
    args = ["run", "--kernel", kernel, "--mode", mode, "--seed", str(seed),
            "--samples", str(samples), "--t64", str(t64), "--out", out]
    for p in params:
        args += ["--param", p]
    assert main(args) in (0, 3)
    rc = main(["aggregate", "--traces", out, "--out", summary])
    return summary, rc


def test_aggregate_and_report_arange(tmp_path, capsys):
    summary, rc = _pipeline(tmp_path)
    assert rc == 0
    doc = json.load(open(summary))
    assert doc["meta"]["kernel"] == "arange"
    assert doc["meta"]["chosen_runs"] == [0, 1, 2, 3, 4]
    capsys.readouterr()
    assert main(["report", summary]) == 0
    text = capsys.readouterr().out
    assert "ok (5/5)" in text
    assert "kernels.arange.arange" in text
    for line in text.splitlines():
        if "kernels.arange" in line:
            assert "53.00" in line


def test_aggregate_mixed_kernels_is_hard_error(tmp_path, capsys):
    out = str(tmp_path / "runs")
    assert main(["run", "--kernel", "arange", "--samples", "1",
                 "--out", out]) == 0
    os.rename(os.path.join(out, "trace-0000.jsonl"),
              os.path.join(out, "trace-0009.jsonl"))
    assert main(["run", "--kernel", "newton_root", "--samples", "1",
                 "--out", out]) == 0
    rc = main(["aggregate", "--traces", out,
               "--out", str(tmp_path / "s.json")])
    assert rc == 2
    assert "kernel" in capsys.readouterr().err


def test_aggregate_divergent_newton_reports_partial(tmp_path, capsys):
    summary, rc = _pipeline(tmp_path, kernel="newton_root", seed=3, t64=43,
                            params=["threshold_mode=strict"])
    assert rc == 0
    err = capsys.readouterr().err
    assert "divergence" in err
    assert main(["report", summary]) == 0
    text = capsys.readouterr().out
    assert "partial" in text
    assert "3/5" in text
    assert "divergent run" in text


def test_aggregate_no_mergeable_group_exit_code(tmp_path, capsys):
    # (seed=0, t64=40) is pre-scanned: all five strict-mode runs take
    # different iteration counts, so the chosen group has a single run
    out = str(tmp_path / "runs")
    assert main(["run", "--kernel", "newton_root", "--param",
                 "threshold_mode=strict", "--mode", "rr", "--t64", "40",
                 "--seed", "0", "--samples", "5", "--out", out]) == 0
    rc = main(["aggregate", "--traces", out,
               "--out", str(tmp_path / "s.json")])
    assert rc == 4
    err = capsys.readouterr().err
    assert "single run" in err
    capsys.readouterr()
    assert main(["report", str(tmp_path / "s.json")]) == 0
    assert "failed" in capsys.readouterr().out


def test_run_jobs_concurrent_matches_sequential(tmp_path):
    seq = str(tmp_path / "seq")
    par = str(tmp_path / "par")
    base = ["run", "--kernel", "interp1d", "--mode", "rr", "--seed", "5",
            "--samples", "4"]
    assert main(base + ["--out", seq]) == 0
    assert main(base + ["--out", par, "--jobs", "4"]) == 0
    for name in sorted(os.listdir(seq)):
        if name.startswith("trace-"):
            a = open(os.path.join(seq, name), "rb").read()
            b = open(os.path.join(par, name), "rb").read()
            assert a == b, name


def test_report_empty_summary(tmp_path, capsys):
    summary = str(tmp_path / "s.json")
    with open(summary, "w") as fh:
        json.dump({"meta": {"kernel": "x", "params": {}, "mode": "rr",
                            "t64": 53, "t32": 24, "seed": 0, "n_runs": 0,
                            "chosen_runs": [], "groups": [],
                            "divergence": [], "uninformative": False},
                   "callsites": []}, fh)
    assert main(["report", summary]) == 0
    assert "no instrumented calls" in capsys.readouterr().out


def test_report_writes_csv_and_figures(tmp_path, capsys):
    summary, _ = _pipeline(tmp_path, kernel="unstable_branch",
                           params=["grid_n=16"])
    figdir = str(tmp_path / "figs")
    assert main(["report", summary, "--out-dir", figdir]) == 0
    names = sorted(os.listdir(figdir))
    assert "report.csv" in names
    assert "timeline.png" in names and "gantt.png" in names
    assert "heatmap.png" in names
    csv_text = open(os.path.join(figdir, "report.csv")).read()
    assert "classify_grid" in csv_text


def test_end_to_end_report_deterministic(tmp_path, capsys):
    s1, _ = _pipeline(tmp_path / "one", kernel="dft", params=["n=32"])
    s2, _ = _pipeline(tmp_path / "two", kernel="dft", params=["n=32"])
    assert open(s1, "rb").read() == open(s2, "rb").read()
    capsys.readouterr()
    main(["report", s1])
    t1 = capsys.readouterr().out
    main(["report", s2])
    t2 = capsys.readouterr().out
    assert t1 == t2


# -- serve ----------------------------------------------------------------------

@pytest.fixture()
def server(tmp_path):
    import mcaprof

    summary, _ = _pipeline(tmp_path, kernel="unstable_branch",
                           params=["grid_n=16"])
    doc = json.load(open(summary))
    source_root = os.path.dirname(mcaprof.__file__)
    srv = make_server(doc, source_root, port=0)
    import threading
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    yield f"http://127.0.0.1:{srv.server_address[1]}", doc
    srv.shutdown()
    srv.server_close()


def _get(base, path):
    try:
        with urllib.request.urlopen(base + path) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def test_serve_meta_and_callsites(server):
    base, doc = server
    code, meta = _get(base, "/api/meta")
    assert code == 200 and meta == doc["meta"]
    code, sites = _get(base, "/api/callsites")
    assert code == 200
    assert {s["function"] for s in sites} == {"classify_grid", "score_grid",
                                              "label_grid"}
    assert all("rollup_sigbits" in s for s in sites)


def test_serve_timeline(server):
    base, _ = server
    code, tl = _get(base, "/api/callsite/0/timeline?stat=sigbits")
    assert code == 200
    assert tl["stat"] == "sigbits"
    directions = {s["direction"] for s in tl["series"]}
    assert directions == {"in", "out"}
    for series in tl["series"]:
        for pt in series["points"]:
            assert set(pt) == {"invocation", "counter", "value"}


def test_serve_gantt_nesting(server):
    base, _ = server
    code, bars = _get(base, "/api/gantt")
    assert code == 200
    by_depth = sorted(bars, key=lambda b: b["depth"])
    outer = by_depth[0]
    assert outer["depth"] == 0
    for bar in by_depth[1:]:
        assert outer["counter_start"] < bar["counter_start"]
        assert bar["counter_end"] < outer["counter_end"]


def test_serve_slot(server):
    base, doc = server
    site = [c for c in doc["callsites"] if c["function"] == "score_grid"][0]
    code, slot = _get(base, f"/api/callsite/{site['id']}/invocation/0/slot"
                            "?path=score&dir=out&stat=sigbits")
    assert code == 200
    assert slot["shape"] == [16, 16]
    assert len(slot["data"]) == 256
    assert slot["inf_norm"] is not None


def test_serve_source(server):
    base, _ = server
    code, src = _get(base, "/api/source?file=kernels/hyperplane.py&line=20"
                           "&radius=5")
    assert code == 200
    assert len(src["lines"]) == 11
    assert any("def" in ln["text"] or "import" in ln["text"]
               for ln in src["lines"])


def test_serve_errors(server):
    base, _ = server
    assert _get(base, "/api/callsite/xx/timeline?stat=sigbits")[0] == 400
    assert _get(base, "/api/callsite/0/timeline?stat=bogus")[0] == 400
    assert _get(base, "/api/callsite/99/timeline?stat=mean")[0] == 404
    assert _get(base, "/api/source?file=no/such.py&line=1")[0] == 404
    assert _get(base, "/api/source?file=../../etc/passwd&line=1")[0] == 404
    assert _get(base, "/api/nothing")[0] == 404


def test_serve_idempotent_bodies(server):
    base, _ = server
    first = _get(base, "/api/callsites")
    again = _get(base, "/api/callsites")
    assert first == again
