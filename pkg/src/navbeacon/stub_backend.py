"""Canned STT/LLM HTTP backends for tests and console development.

The stub answers POST /stt with a configured transcript and POST /llm with
either configured labels or a naive containment match of the known labels
against the transcript. Call counts and fault injection make backend
behavior assertable in tests.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .world_store import canonical_name


class StubModelServer:
    """In-process model server; use as a context manager in tests.

    llm_handler(text, labels) -> list[str] overrides the default
    containment matcher. llm_status / llm_raw_body inject faults.
    """

    def __init__(
        self,
        stt_text: str = "",
        llm_handler=None,
        llm_status: int = 200,
        llm_raw_body: bytes | None = None,
        latency: float = 0.0,
        host: str = "127.0.0.1",
    ):
        self.stt_text = stt_text
        self.llm_handler = llm_handler or default_llm_match
        self.llm_status = llm_status
        self.llm_raw_body = llm_raw_body
        self.latency = latency
        self.stt_calls = 0
        self.llm_calls = 0
        self._lock = threading.Lock()
        self._server = ThreadingHTTPServer((host, 0), self._make_handler())
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def stt_url(self) -> str:
        return self.base_url + "/stt"

    @property
    def llm_url(self) -> str:
        return self.base_url + "/llm"

    def reset_counts(self) -> None:
        with self._lock:
            self.stt_calls = 0
            self.llm_calls = 0

    def start(self) -> "StubModelServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=2.0)

    def __enter__(self) -> "StubModelServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _make_handler(self):
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output clean
                pass

            def do_POST(self):
                if stub.latency > 0:
                    time.sleep(stub.latency)
                length = int(self.headers.get("Content-Length", 0))
                body = self.rfile.read(length)
                if self.path == "/stt":
                    with stub._lock:
                        stub.stt_calls += 1
                    self._reply(200, {"text": stub.stt_text})
                elif self.path == "/llm":
                    with stub._lock:
                        stub.llm_calls += 1
                    if stub.llm_raw_body is not None:
                        self._reply_raw(stub.llm_status, stub.llm_raw_body)
                        return
                    if stub.llm_status != 200:
                        self._reply(stub.llm_status, {"error": "injected fault"})
                        return
                    try:
                        req = json.loads(body.decode("utf-8"))
                        labels = stub.llm_handler(req.get("text", ""), req.get("labels", []))
                    except Exception:
                        self._reply(500, {"error": "stub handler failed"})
                        return
                    self._reply(200, {"labels": list(labels)})
                else:
                    self._reply(404, {"error": "unknown path"})

            def _reply(self, status: int, obj) -> None:
                self._reply_raw(status, json.dumps(obj).encode("utf-8"))

            def _reply_raw(self, status: int, data: bytes) -> None:
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        return Handler


def default_llm_match(text: str, labels) -> list[str]:
    """Containment matcher: known labels mentioned verbatim, in text order."""
    canon_text = canonical_name(text)
    found = []
    for label in labels:
        pos = canon_text.find(canonical_name(label))
        if pos >= 0:
            found.append((pos, label))
    found.sort(key=lambda item: item[0])
    return [label for _, label in found]
