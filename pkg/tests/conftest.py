from __future__ import annotations

import json
import threading

import pytest

# Acceptance-criterion results collected for the terminal summary.
_acceptance_results: list[tuple[str, str]] = []


def record_acceptance(name: str, passed: bool) -> None:
    _acceptance_results.append((name, "PASS" if passed else "FAIL"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"[{outcome}] {name}")


class SseClient:
    """Blocking server-sent-events reader used by the service tests."""

    def __init__(self, host: str, port: int, path: str):
        import http.client

        self.conn = http.client.HTTPConnection(host, port, timeout=30)
        self.conn.request("GET", path)
        self.resp = self.conn.getresponse()

    def read_all(self):
        """Collect (events, terminal_status) until the stream closes."""
        events = []
        status = None
        buf = b""
        while status is None:
            chunk = self.resp.read(4096)
            if not chunk:
                break
            buf += chunk
            while b"\n\n" in buf:
                block, buf = buf.split(b"\n\n", 1)
                ev_type, data = "message", None
                for line in block.decode("utf-8").splitlines():
                    if line.startswith("event: "):
                        ev_type = line[7:]
                    elif line.startswith("data: "):
                        data = line[6:]
                if data is None:
                    continue
                if ev_type == "status":
                    status = json.loads(data)
                else:
                    events.append(json.loads(data))
        self.conn.close()
        return events, status


@pytest.fixture()
def service_server():
    from patchlang.service import PatchService

    svc = PatchService()
    server = svc.make_server("127.0.0.1", 0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield svc, "127.0.0.1", port
    finally:
        server.shutdown()
        server.server_close()
