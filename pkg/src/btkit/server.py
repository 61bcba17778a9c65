"""HTTP server for interactive sessions.

Protocol (JSON bodies, one pending prompt per session at a time):

* ``POST /sessions`` ``{tree?, blackboard?}`` -> ``{session_id, prompt?, final_status?}``
  (``tree`` is DSL text; without it the served tree is used; the session is
  advanced to its first prompt)
* ``POST /sessions/<id>/step`` ``{answer?}`` -> ``{events[], prompt?, final_status?}``
* ``GET /sessions/<id>`` -> full session state including the event log
* ``GET /tree`` -> ``{name, dsl, dot, tree}`` (serialized DSL, DOT, and a
  structured mirror of the node tree for clients that render it)

Event objects use the trace-line schema (tick, node, phase, status?, delta?).
Static files from ``ui_dir`` are served for every other GET path.
"""

from __future__ import annotations

import json
import signal
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional

from .analysis import export_dot
from .dsl import parse, serialize
from .errors import BtkitError, SessionProtocolError
from .execution import Answer, Session, SessionUpdate, session_start, session_step
from .model import Effect, Node, Predicate, Tree

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def node_to_obj(node: Node) -> dict[str, Any]:
    params: dict[str, Any] = {}
    for key, value in node.params.items():
        if isinstance(value, Predicate):
            params[key] = value.text()
        elif isinstance(value, Effect):
            params[key] = value.text()
        else:
            params[key] = value
    return {
        "id": node.id,
        "kind": node.kind.value,
        "label": node.label,
        "params": params,
        "children": [node_to_obj(c) for c in node.children],
    }


class _State:
    def __init__(self, tree: Tree, ui_dir: Optional[Path]):
        self.tree = tree
        self.dsl = serialize(tree)
        self.dot = export_dot(tree)
        self.ui_dir = ui_dir.resolve() if ui_dir else None
        self.sessions: dict[str, tuple[Session, threading.Lock]] = {}
        self.lock = threading.Lock()

    def add_session(self, session: Session) -> None:
        with self.lock:
            self.sessions[session.session_id] = (session, threading.Lock())

    def get_session(self, session_id: str) -> Optional[tuple[Session, threading.Lock]]:
        with self.lock:
            return self.sessions.get(session_id)

    def open_count(self) -> int:
        with self.lock:
            return sum(1 for s, _ in self.sessions.values() if not s.finished)


def _update_obj(update: SessionUpdate) -> dict[str, Any]:
    obj: dict[str, Any] = {"events": [e.to_obj() for e in update.events]}
    if update.prompt is not None:
        obj["prompt"] = update.prompt.to_obj()
    if update.final_status is not None:
        obj["final_status"] = update.final_status.value
    return obj


def _session_obj(session: Session) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "session_id": session.session_id,
        "finished": session.finished,
        "ticks": session.ticks,
        "events": [e.to_obj() for e in session.events],
        "blackboard": session.blackboard.as_dict(),
    }
    if session.pending_prompt is not None:
        obj["prompt"] = session.pending_prompt.to_obj()
    if session.final_status is not None:
        obj["final_status"] = session.final_status.value
    return obj


class _Handler(BaseHTTPRequestHandler):
    state: _State  # set on the subclass by make_server

    def log_message(self, format: str, *args: Any) -> None:
        pass  # tests and interactive use do not want per-request stderr noise

    # -- helpers --

    def _send_json(self, code: int, obj: dict[str, Any]) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._send_json(code, {"error": message})

    def _read_json(self) -> Optional[dict[str, Any]]:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._error(400, "request body is not valid JSON")
            return None
        if not isinstance(obj, dict):
            self._error(400, "request body must be a JSON object")
            return None
        return obj

    # -- routing --

    def do_GET(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/tree":
            self._send_json(200, {
                "name": self.state.tree.name,
                "dsl": self.state.dsl,
                "dot": self.state.dot,
                "tree": node_to_obj(self.state.tree.root),
            })
            return
        if path.startswith("/sessions/"):
            session_id = path[len("/sessions/"):]
            found = self.state.get_session(session_id)
            if found is None:
                self._error(404, f"no session {session_id!r}")
                return
            session, lock = found
            with lock:
                self._send_json(200, _session_obj(session))
            return
        self._serve_static(path)

    def do_POST(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/sessions":
            self._create_session()
            return
        if path.startswith("/sessions/") and path.endswith("/step"):
            session_id = path[len("/sessions/"):-len("/step")]
            self._step_session(session_id)
            return
        self._error(404, f"no such endpoint {path!r}")

    # -- handlers --

    def _create_session(self) -> None:
        body = self._read_json()
        if body is None:
            return
        tree = self.state.tree
        if body.get("tree"):
            result = parse(body["tree"])
            if result.tree is None:
                self._error(400, "tree does not parse: "
                            + "; ".join(str(d) for d in result.errors))
                return
            tree = result.tree
        try:
            session = session_start(
                tree,
                initial_blackboard=body.get("blackboard"),
                session_id=uuid.uuid4().hex[:12],
            )
            self.state.add_session(session)
            update = session_step(session)
        except BtkitError as e:
            self._error(400, str(e))
            return
        obj = {"session_id": session.session_id}
        if update.prompt is not None:
            obj["prompt"] = update.prompt.to_obj()
        if update.final_status is not None:
            obj["final_status"] = update.final_status.value
        self._send_json(200, obj)

    def _step_session(self, session_id: str) -> None:
        body = self._read_json()
        if body is None:
            return
        found = self.state.get_session(session_id)
        if found is None:
            self._error(404, f"no session {session_id!r}")
            return
        session, lock = found
        answer = None
        if body.get("answer") is not None:
            try:
                answer = Answer.from_obj(body["answer"])
            except (KeyError, ValueError) as e:
                self._error(400, f"bad answer: {e}")
                return
        with lock:
            try:
                update = session_step(session, answer)
            except SessionProtocolError as e:
                self._error(409, str(e))
                return
            except BtkitError as e:
                self._error(400, str(e))
                return
        self._send_json(200, _update_obj(update))

    def _serve_static(self, path: str) -> None:
        ui_dir = self.state.ui_dir
        if ui_dir is None:
            if path == "/":
                self._send_json(200, {
                    "service": "btkit session server",
                    "tree": self.state.tree.name,
                    "endpoints": ["/tree", "/sessions", "/sessions/<id>", "/sessions/<id>/step"],
                    "note": "no UI bundle configured; pass --ui-dir to serve one",
                })
                return
            self._error(404, f"no such endpoint {path!r}")
            return
        rel = path.lstrip("/") or "index.html"
        target = (ui_dir / rel).resolve()
        if not str(target).startswith(str(ui_dir)) or not target.is_file():
            self._error(404, f"no such file {path!r}")
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type",
                         _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(
    tree: Tree,
    host: str = "127.0.0.1",
    port: int = 8733,
    ui_dir: Optional[Path] = None,
) -> ThreadingHTTPServer:
    """Bound server ready for ``serve_forever``; raises OSError if the port is busy."""
    state = _State(tree, ui_dir)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((host, port), handler)
    server.state = state  # type: ignore[attr-defined]
    return server


def serve(tree: Tree, host: str, port: int, ui_dir: Optional[Path]) -> int:
    try:
        server = make_server(tree, host, port, ui_dir)
    except OSError as e:
        print(f"error: cannot bind {host}:{port}: {e.strerror or e}")
        return 2
    bound_port = server.server_address[1]
    ui_note = f", ui from {ui_dir}" if ui_dir else ", no ui bundle"
    print(f"serving {tree.name!r} on http://{host}:{bound_port}{ui_note}", flush=True)

    def _terminate(signum, frame):
        raise KeyboardInterrupt

    previous = signal.signal(signal.SIGTERM, _terminate)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        open_count = server.state.open_count()  # type: ignore[attr-defined]
        print(f"shutting down; {open_count} in-flight session(s) closed", flush=True)
    finally:
        signal.signal(signal.SIGTERM, previous)
        server.server_close()
    return 0
