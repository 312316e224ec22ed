"""Local HTTP service backing the editor UI.

Single-user, local-first, no authentication; binds loopback by default.
Document store, validation, run sessions with a live server-sent event
feed, partial-execution preview, and code emission:

    PUT  /documents/{id}              store document, returns validation report
    GET  /documents/{id}              canonical document text
    GET  /documents                   list stored ids
    POST /documents/{id}/runs         {"module"?, "inputs"?, "console"?} -> session
    GET  /runs/{sid}                  status snapshot
    GET  /runs/{sid}/events?from=N    server-sent events until terminal
    POST /runs/{sid}/stop             force-stop a running session
    POST /documents/{id}/emit         {"dialect", "module"?} -> source text
    POST /documents/{id}/preview      {"prefixStep", "module"?, "inputs"?}

Input values arrive as canonical literal strings. A run session holds an
immutable snapshot of the document taken when the run started; later
edits do not affect it. 400 malformed, 404 unknown id, 409 run on an
invalid document, 422 resolution failures.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional

from .codegen import available_dialects, emit
from .document import (
    FILE_EXTENSION, MEDIA_TYPE, PatchDocument, parse, read_value,
    render_value, serialize,
)
from .errors import DocumentError, EmitError, EvalError, PatchError, \
    ResolveError
from .interpreter import Repository, RunConfig, ScriptedConsole, run_module
from .model import document_order
from .tracestream import (
    FINISHED, Feed, SessionStore, TraceSession, event_to_wire,
)
from .validate import validate

_DOC_ID_RE = re.compile(r"^[A-Za-z0-9_.-]{1,128}$")


class _HttpError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


class PatchService:
    """Application state shared by all request handler threads."""

    def __init__(self, directory: str | None = None,
                 buffer_cap: int = 1_000_000):
        self.documents: dict[str, PatchDocument] = {}
        self.doc_lock = threading.Lock()
        self.sessions = SessionStore(buffer_cap=buffer_cap)
        self.directory = Path(directory) if directory else None
        self._threads: list[threading.Thread] = []
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            for f in sorted(self.directory.glob(f"*{FILE_EXTENSION}")):
                doc_id = f.name[:-len(FILE_EXTENSION)]
                try:
                    self.documents[doc_id] = parse(
                        f.read_text(encoding="utf-8"))
                except DocumentError:
                    continue

    # -- documents

    def put_document(self, doc_id: str, text: str) -> dict:
        if not _DOC_ID_RE.match(doc_id):
            raise _HttpError(400, f"bad document id {doc_id!r}")
        try:
            doc = parse(text)
        except DocumentError as e:
            raise _HttpError(400, str(e)) from None
        with self.doc_lock:
            self.documents[doc_id] = doc
            if self.directory is not None:
                path = self.directory / f"{doc_id}{FILE_EXTENSION}"
                path.write_text(serialize(doc), encoding="utf-8")
        report = validate(doc.program)
        return {
            "id": doc_id,
            "report": [{"module": f.module, "step": f.step_id,
                        "rule": f.rule, "message": f.message}
                       for f in report],
        }

    def get_document(self, doc_id: str) -> PatchDocument:
        with self.doc_lock:
            if doc_id not in self.documents:
                raise _HttpError(404, f"no document {doc_id!r}")
            return self.documents[doc_id]

    # -- runs

    def _parse_inputs(self, body: dict) -> dict:
        args = {}
        for name, raw in (body.get("inputs") or {}).items():
            if not isinstance(raw, str):
                raise _HttpError(400,
                                 f"input {name!r} must be a literal string")
            try:
                args[name] = read_value(raw)
            except DocumentError as e:
                raise _HttpError(400, f"input {name!r}: {e.message}") \
                    from None
        return args

    def start_run(self, doc_id: str, body: dict) -> dict:
        doc = self.get_document(doc_id)
        report = validate(doc.program)
        if report:
            raise _HttpError(409, "document has validation findings")
        program = doc.program  # immutable snapshot reference
        module = body.get("module") or program.entry
        if program.module(module) is None:
            raise _HttpError(422, f"no module named {module!r}")
        args = self._parse_inputs(body)
        console_lines = list(body.get("console") or [])
        session = self.sessions.create()

        def work():
            console = ScriptedConsole(console_lines)
            config = RunConfig(abort_check=session.stop_requested)
            try:
                result = run_module(program, module, args=args,
                                    console=console,
                                    repository=Repository(),
                                    config=config,
                                    on_event=session.append)
                session.finish({k: render_value(v)
                                for k, v in result.outputs.items()})
            except PatchError as e:
                if e.code == "run-aborted":
                    session.stopped()
                else:
                    session.fail(e)

        t = threading.Thread(target=work, daemon=True,
                             name=f"patch-{session.session_id}")
        self._threads.append(t)
        t.start()
        return {"session": session.session_id}

    def get_session(self, sid: str) -> TraceSession:
        try:
            return self.sessions.get(sid)
        except EvalError:
            raise _HttpError(404, f"no session {sid!r}") from None

    def preview(self, doc_id: str, body: dict) -> dict:
        doc = self.get_document(doc_id)
        report = validate(doc.program)
        if report:
            raise _HttpError(409, "document has validation findings")
        program = doc.program
        module_name = body.get("module") or program.entry
        m = program.module(module_name)
        if m is None:
            raise _HttpError(422, f"no module named {module_name!r}")
        prefix_step = body.get("prefixStep")
        allowed: Optional[dict[str, set[str]]] = None
        if prefix_step is not None:
            order = document_order(m)
            if prefix_step not in order:
                raise _HttpError(404, f"no step {prefix_step!r}")
            cut = order.index(prefix_step) + 1
            allowed = {m.norm(): set(order[:cut])}
        args = self._parse_inputs(body)
        console = ScriptedConsole(list(body.get("console") or []))
        try:
            result = run_module(program, module_name, args=args,
                                console=console, repository=Repository(),
                                config=RunConfig(
                                    allowed_steps=allowed))
        except ResolveError as e:
            raise _HttpError(422, str(e)) from None
        except EvalError as e:
            if e.code == "output-unassigned":
                # a preview cut may land before outputs exist; report
                # the variables that are bound instead of failing
                return self._preview_partial(program, module_name, args,
                                             body, allowed)
            raise _HttpError(422, str(e)) from None
        variables = _final_variables(result.trace)
        return {
            "outputs": {k: render_value(v)
                        for k, v in result.outputs.items()},
            "displayed": console.displayed,
            "variables": variables,
            "stopped": result.stopped,
        }

    def _preview_partial(self, program, module_name, args, body, allowed):
        from .interpreter import Interpreter
        console = ScriptedConsole(list(body.get("console") or []))
        interp = Interpreter(program, console=console,
                             repository=Repository(),
                             config=RunConfig(allowed_steps=allowed))
        m = program.module(module_name)
        frame = interp._seed_frame(m, args)
        interp._run_module(m, frame)
        variables = {k: render_value(v)
                     for k, v in sorted(frame.values.items())}
        return {"outputs": {}, "displayed": console.displayed,
                "variables": variables, "stopped": False}

    def emit_source(self, doc_id: str, body: dict) -> dict:
        doc = self.get_document(doc_id)
        dialect = body.get("dialect")
        if dialect not in available_dialects():
            raise _HttpError(400, f"unknown dialect {dialect!r}")
        program = doc.program
        module_name = body.get("module") or program.entry
        m = program.module(module_name)
        if m is None:
            raise _HttpError(422, f"no module named {module_name!r}")
        try:
            src = emit(m, dialect, program)
        except EmitError as e:
            raise _HttpError(422, str(e)) from None
        return {"dialect": dialect, "text": src.text,
                "entry": src.entry_symbol, "filename": src.filename}

    # -- server plumbing

    def serve(self, host: str = "127.0.0.1", port: int = 7341):
        server = self.make_server(host, port)
        host, actual_port = server.server_address[:2]
        print(f"patchlang service listening on http://{host}:{actual_port}",
              flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            server.server_close()

    def make_server(self, host: str = "127.0.0.1",
                    port: int = 0) -> ThreadingHTTPServer:
        service = self

        class Handler(_PatchHandler):
            pass

        Handler.service = service
        server = ThreadingHTTPServer((host, port), Handler)
        server.daemon_threads = True
        return server


def _final_variables(trace) -> dict[str, str]:
    values: dict[str, Any] = {}
    for ev in trace:
        if ev.kind == "enter" and ev.snapshot:
            values.update(ev.snapshot)
        elif ev.kind in ("assign", "transform") and "var" in ev.data:
            values[ev.data["var"]] = ev.data["new"]
        elif ev.kind == "read" and "var" in ev.data:
            values[ev.data["var"]] = ev.data["value"]
        elif ev.kind == "loop-iter" and "var" in ev.data:
            values[ev.data["var"]] = ev.data["value"]
    return {k: render_value(v) for k, v in sorted(values.items())}


class _PatchHandler(BaseHTTPRequestHandler):
    service: PatchService
    protocol_version = "HTTP/1.1"

    # quiet request logging; diagnostics panel shows errors instead
    def log_message(self, fmt, *args):
        pass

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods",
                         "GET, PUT, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _reply(self, status: int, payload: Any,
               content_type: str = "application/json") -> None:
        body = payload if isinstance(payload, bytes) else \
            json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str) -> None:
        self._reply(status, {"error": message})

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            data = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            raise _HttpError(400, "body is not valid JSON") from None
        if not isinstance(data, dict):
            raise _HttpError(400, "body must be a JSON object")
        return data

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_PUT(self):
        try:
            m = re.fullmatch(r"/documents/([^/]+)", self.path)
            if not m:
                raise _HttpError(404, "unknown endpoint")
            length = int(self.headers.get("Content-Length") or 0)
            text = self.rfile.read(length).decode("utf-8")
            self._reply(200, self.service.put_document(m.group(1), text))
        except _HttpError as e:
            self._error(e.status, e.message)

    def do_GET(self):
        try:
            path, _, query = self.path.partition("?")
            if path == "/documents":
                with self.service.doc_lock:
                    ids = sorted(self.service.documents)
                self._reply(200, {"documents": ids})
                return
            m = re.fullmatch(r"/documents/([^/]+)", path)
            if m:
                doc = self.service.get_document(m.group(1))
                self._reply(200, serialize(doc).encode("utf-8"),
                            content_type=MEDIA_TYPE)
                return
            m = re.fullmatch(r"/runs/([^/]+)/events", path)
            if m:
                self._stream_events(m.group(1), query)
                return
            m = re.fullmatch(r"/runs/([^/]+)", path)
            if m:
                s = self.service.get_session(m.group(1))
                self._reply(200, _session_snapshot(s))
                return
            raise _HttpError(404, "unknown endpoint")
        except _HttpError as e:
            self._error(e.status, e.message)

    def do_POST(self):
        try:
            m = re.fullmatch(r"/documents/([^/]+)/runs", self.path)
            if m:
                self._reply(200, self.service.start_run(m.group(1),
                                                        self._body()))
                return
            m = re.fullmatch(r"/documents/([^/]+)/emit", self.path)
            if m:
                self._reply(200, self.service.emit_source(m.group(1),
                                                          self._body()))
                return
            m = re.fullmatch(r"/documents/([^/]+)/preview", self.path)
            if m:
                self._reply(200, self.service.preview(m.group(1),
                                                      self._body()))
                return
            m = re.fullmatch(r"/runs/([^/]+)/stop", self.path)
            if m:
                session = self.service.get_session(m.group(1))
                session.request_stop()
                # unblock instantly for sessions that already ended
                status = session.status if session.terminal() else "running"
                self._reply(200, {"session": session.session_id,
                                  "status": status})
                return
            raise _HttpError(404, "unknown endpoint")
        except _HttpError as e:
            self._error(e.status, e.message)

    def _stream_events(self, sid: str, query: str) -> None:
        session = self.service.get_session(sid)
        from_seq = 1
        for part in query.split("&"):
            if part.startswith("from="):
                try:
                    from_seq = int(part[5:])
                except ValueError:
                    raise _HttpError(400, "bad from= value") from None
        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        # the stream has no length; closing is how the client sees EOF
        self.send_header("Connection", "close")
        self.close_connection = True
        self.end_headers()
        feed = Feed(session, from_seq)
        try:
            for ev in feed:
                chunk = (f"data: "
                         f"{json.dumps(event_to_wire(ev), ensure_ascii=False)}"
                         f"\n\n")
                self.wfile.write(chunk.encode("utf-8"))
                self.wfile.flush()
            terminal = json.dumps(_session_snapshot(session),
                                  ensure_ascii=False)
            self.wfile.write(f"event: status\ndata: {terminal}\n\n"
                             .encode("utf-8"))
            self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass


def _session_snapshot(s: TraceSession) -> dict:
    snap: dict[str, Any] = {"session": s.session_id, "status": s.status,
                            "events": len(s.events)}
    if s.status == FINISHED:
        snap["outputs"] = s.outputs
    if s.error is not None:
        snap["error"] = s.error
        snap["errorCode"] = s.error_code
    return snap
