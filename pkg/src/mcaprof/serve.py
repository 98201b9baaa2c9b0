"""Read-only HTTP API over a summary document plus source snippets.

All endpoints are GET, return JSON (UTF-8), and never mutate state, so
concurrent requests over the immutable document are safe.  Responses
carry a permissive CORS header so the dashboard can run from another
origin.
"""

from __future__ import annotations

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

__all__ = ["SummaryAPI", "make_server", "serve_summary"]

_STATS = ("sigbits", "mean", "std")


class ApiError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class SummaryAPI:
    """Pure request->object mapping; the HTTP layer is a thin shell."""

    def __init__(self, doc: dict, source_root: str):
        self.doc = doc
        self.source_root = os.path.realpath(source_root)

    def _site(self, callsite_id: str) -> dict:
        if not callsite_id.isdigit():
            raise ApiError(400, f"malformed callsite id {callsite_id!r}")
        idx = int(callsite_id)
        sites = self.doc["callsites"]
        if idx >= len(sites):
            raise ApiError(404, f"no callsite {callsite_id!r}")
        return sites[idx]

    @staticmethod
    def _stat_value(slot: dict, stat: str) -> float | None:
        if stat == "sigbits":
            return slot["rollup_sigbits"]
        vals = [v for v in slot[stat] if v is not None]
        return sum(vals) / len(vals) if vals else None

    def meta(self) -> dict:
        return self.doc["meta"]

    def callsites(self) -> list[dict]:
        out = []
        for site in self.doc["callsites"]:
            rollups = [slot["rollup_sigbits"]
                       for inv in site["invocations"]
                       for slot in inv["outputs"]]
            out.append({
                "id": site["id"],
                "module": site["module"],
                "function": site["function"],
                "invocations": len(site["invocations"]),
                "rollup_sigbits":
                    sum(rollups) / len(rollups) if rollups else None,
                "backtrace": site["backtrace"],
            })
        return out

    def timeline(self, callsite_id: str, stat: str) -> dict:
        if stat not in _STATS:
            raise ApiError(400, f"unknown stat {stat!r}; expected {_STATS}")
        site = self._site(callsite_id)
        series: dict[tuple, dict] = {}
        for inv in site["invocations"]:
            for direction, key, counter in (("in", "inputs", "counter_start"),
                                            ("out", "outputs", "counter_end")):
                for slot in inv[key]:
                    sk = (slot["path"], direction)
                    entry = series.setdefault(sk, {
                        "path": slot["path"], "direction": direction,
                        "points": []})
                    entry["points"].append({
                        "invocation": inv["index"],
                        "counter": inv[counter],
                        "value": self._stat_value(slot, stat),
                    })
        return {"id": site["id"], "module": site["module"],
                "function": site["function"], "stat": stat,
                "series": list(series.values())}

    def gantt(self) -> list[dict]:
        bars = []
        for site in self.doc["callsites"]:
            for inv in site["invocations"]:
                bars.append({
                    "id": site["id"],
                    "module": site["module"],
                    "function": site["function"],
                    "invocation": inv["index"],
                    "counter_start": inv["counter_start"],
                    "counter_end": inv["counter_end"],
                    "depth": inv["depth"],
                })
        bars.sort(key=lambda b: b["counter_start"])
        return bars

    def slot(self, callsite_id: str, invocation: str, path: str,
             direction: str, stat: str) -> dict:
        if stat not in _STATS:
            raise ApiError(400, f"unknown stat {stat!r}; expected {_STATS}")
        if direction not in ("in", "out"):
            raise ApiError(400, f"dir must be 'in' or 'out', got {direction!r}")
        if not invocation.isdigit():
            raise ApiError(400, f"malformed invocation index {invocation!r}")
        site = self._site(callsite_id)
        k = int(invocation)
        if k >= len(site["invocations"]):
            raise ApiError(404, f"no invocation {k} of callsite {callsite_id}")
        inv = site["invocations"][k]
        slots = inv["inputs" if direction == "in" else "outputs"]
        for slot in slots:
            if slot["path"] == path:
                return {
                    "id": site["id"], "invocation": k, "path": path,
                    "direction": direction, "stat": stat,
                    "dtype": slot["dtype"], "shape": slot["shape"],
                    "data": slot[stat], "inf_norm": slot["inf_norm"],
                    "cap": self.doc["meta"]["t32"]
                        if slot["dtype"] == "f32" else self.doc["meta"]["t64"],
                }
        raise ApiError(404, f"no slot {path!r} ({direction}) in invocation {k}")

    def source(self, file: str, line: str, radius: str) -> dict:
        if not file:
            raise ApiError(400, "missing file parameter")
        try:
            line_no = int(line)
            rad = int(radius) if radius else 15
        except ValueError as exc:
            raise ApiError(400, f"bad line/radius: {exc}") from exc
        full = os.path.realpath(os.path.join(self.source_root, file))
        if not full.startswith(self.source_root + os.sep):
            raise ApiError(404, f"source file outside root: {file}")
        if not os.path.isfile(full):
            raise ApiError(404, f"no such source file: {file}")
        with open(full, encoding="utf-8", errors="replace") as fh:
            all_lines = fh.read().splitlines()
        lo = max(1, line_no - rad)
        hi = min(len(all_lines), line_no + rad)
        return {"file": file, "line": line_no,
                "lines": [{"line": i, "text": all_lines[i - 1]}
                          for i in range(lo, hi + 1)]}

    def dispatch(self, path: str, query: dict) -> object:
        q = {k: v[0] for k, v in query.items()}
        if path == "/api/meta":
            return self.meta()
        if path == "/api/callsites":
            return self.callsites()
        if path == "/api/gantt":
            return self.gantt()
        if path == "/api/source":
            return self.source(q.get("file", ""), q.get("line", "1"),
                               q.get("radius", ""))
        parts = [p for p in path.split("/") if p]
        if len(parts) == 4 and parts[:2] == ["api", "callsite"] \
                and parts[3] == "timeline":
            return self.timeline(parts[2], q.get("stat", "sigbits"))
        if len(parts) == 6 and parts[:2] == ["api", "callsite"] \
                and parts[3] == "invocation" and parts[5] == "slot":
            return self.slot(parts[2], parts[4], q.get("path", ""),
                             q.get("dir", "out"), q.get("stat", "sigbits"))
        raise ApiError(404, f"no such endpoint: {path}")


def _make_handler(api: SummaryAPI):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def _send(self, code: int, obj) -> None:
            body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            url = urlparse(self.path)
            try:
                self._send(200, api.dispatch(url.path, parse_qs(url.query)))
            except ApiError as exc:
                self._send(exc.code, {"error": exc.message})
            except Exception as exc:  # pragma: no cover - defensive
                self._send(500, {"error": str(exc)})

    return Handler


def make_server(doc: dict, source_root: str, port: int,
                host: str = "127.0.0.1") -> ThreadingHTTPServer:
    api = SummaryAPI(doc, source_root)
    return ThreadingHTTPServer((host, port), _make_handler(api))


def serve_summary(doc: dict, source_root: str, port: int,
                  host: str = "127.0.0.1",
                  background: bool = False) -> ThreadingHTTPServer:
    server = make_server(doc, source_root, port, host)
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return server
