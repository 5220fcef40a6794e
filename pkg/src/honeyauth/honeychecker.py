"""Honeychecker: an in-memory uid -> true-index map behind a tiny line protocol.

Requests (UTF-8, one per ``\\n``-terminated line)::

    SET <uid> <k> <index>     -> OK
    CHECK <uid> <index>       -> REAL | HONEY
    REMOVE <uid>              -> OK
    PING                      -> PONG

Errors are ``ERR RANGE``, ``ERR UNKNOWN`` or ``ERR SYNTAX``.  Success replies
are space-padded to 8 bytes including the newline so REAL and HONEY have the
same length on the wire; error replies are padded to 12.  The grammar only
admits uids and integers, so no password material can ever reach the map.
"""

from __future__ import annotations

import logging
import os
import re
import socket
import socketserver
import threading
from dataclasses import dataclass

from .credstore import UID_PATTERN
from .errors import CheckerUnavailable, ProtocolError

log = logging.getLogger(__name__)

DEFAULT_BIND = "127.0.0.1:7379"
REPLY_WIDTH = 8
ERROR_WIDTH = 12
MAX_LINE = 256
REAL = "REAL"
HONEY = "HONEY"

_INT = re.compile(r"0|[1-9][0-9]{0,8}")


def pad(reply: str) -> bytes:
    width = ERROR_WIDTH if reply.startswith("ERR") else REPLY_WIDTH
    return (reply.ljust(width - 1) + "\n").encode("ascii")


class CheckerIndex:
    """uid -> (k, true_index).  Lives in memory only and refuses to pickle."""

    def __init__(self):
        self._entries: dict[str, tuple[int, int]] = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._entries)

    def __reduce__(self):
        raise TypeError("CheckerIndex is never serialized")

    def set(self, uid: str, k: int, true_index: int) -> None:
        if k < 1 or not 0 <= true_index < k:
            raise ProtocolError("RANGE", f"index {true_index} outside [0, {k})")
        with self._lock:
            self._entries[uid] = (k, true_index)

    def check(self, uid: str, index: int) -> str:
        with self._lock:
            entry = self._entries.get(uid)
        if entry is None:
            raise ProtocolError("UNKNOWN", uid)
        k, true_index = entry
        if not 0 <= index < k:
            raise ProtocolError("RANGE", f"index {index} outside [0, {k})")
        return REAL if index == true_index else HONEY

    def remove(self, uid: str) -> None:
        with self._lock:
            self._entries.pop(uid, None)


def _uid(tok):
    if not UID_PATTERN.fullmatch(tok):
        raise ProtocolError("SYNTAX", "bad uid")
    return tok


def _int(tok):
    if not _INT.fullmatch(tok):
        raise ProtocolError("SYNTAX", "bad integer")
    return int(tok)


def handle_line(index: CheckerIndex, line: str) -> str:
    """Execute one request line and return the unpadded reply."""
    parts = line.rstrip("\r\n").split(" ")
    try:
        match parts:
            case ["PING"]:
                return "PONG"
            case ["SET", uid, k, i]:
                index.set(_uid(uid), _int(k), _int(i))
                return "OK"
            case ["CHECK", uid, i]:
                return index.check(_uid(uid), _int(i))
            case ["REMOVE", uid]:
                index.remove(_uid(uid))
                return "OK"
            case _:
                raise ProtocolError("SYNTAX")
    except ProtocolError as exc:
        return f"ERR {exc.code}"


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server: CheckerServer = self.server
        if not server.slots.acquire(blocking=False):
            log.warning("connection limit reached; dropping %s", self.client_address)
            return
        try:
            while True:
                raw = self.rfile.readline(MAX_LINE + 1)
                if not raw:
                    break
                if len(raw) > MAX_LINE or not raw.endswith(b"\n"):
                    self.wfile.write(pad("ERR SYNTAX"))
                    break
                try:
                    line = raw.decode("utf-8")
                except UnicodeDecodeError:
                    reply = "ERR SYNTAX"
                else:
                    reply = handle_line(server.index, line)
                self.wfile.write(pad(reply))
        except (ConnectionError, OSError):
            pass
        finally:
            server.slots.release()


class CheckerServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, index=None, max_connections=64):
        self.index = index if index is not None else CheckerIndex()
        self.slots = threading.BoundedSemaphore(max_connections)
        super().__init__(address, _Handler)

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


def parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be HOST:PORT, got {addr!r}")
    return host or "127.0.0.1", int(port)


def resolve_bind(cli_bind: str | None = None) -> str:
    """--bind wins over HC_BIND, which wins over the loopback default."""
    return cli_bind or os.environ.get("HC_BIND") or DEFAULT_BIND


def start_server(bind: str = "127.0.0.1:0", index=None, **kwargs) -> tuple[CheckerServer, threading.Thread]:
    """Serve in a daemon thread; returns the server (use ``.address``) and thread."""
    server = CheckerServer(parse_addr(bind), index=index, **kwargs)
    thread = threading.Thread(target=server.serve_forever, name="honeychecker", daemon=True)
    thread.start()
    return server, thread


class CheckerClient:
    """Blocking client with one persistent connection, reconnecting on demand.

    ``sent`` counts request lines written, which tests use to prove a
    non-matching login never talks to the checker.
    """

    def __init__(self, addr: str, timeout: float = 2.0):
        self.addr = parse_addr(addr)
        self.timeout = timeout
        self.sent = 0
        self._sock = None
        self._rfile = None
        self._lock = threading.Lock()

    def _connect(self):
        try:
            self._sock = socket.create_connection(self.addr, timeout=self.timeout)
        except OSError as exc:
            raise CheckerUnavailable(f"cannot reach honeychecker at {self.addr}: {exc}") from None
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._rfile = self._sock.makefile("rb")

    def close(self):
        with self._lock:
            self._drop()

    def _drop(self):
        if self._sock is not None:
            try:
                self._rfile.close()
                self._sock.close()
            except OSError:
                pass
        self._sock = self._rfile = None

    def request(self, line: str) -> str:
        with self._lock:
            for attempt in (0, 1):
                if self._sock is None:
                    self._connect()
                try:
                    self._sock.sendall(line.encode("ascii") + b"\n")
                    self.sent += 1
                    reply = self._rfile.readline()
                    if not reply:
                        raise ConnectionError("connection closed")
                    return reply.decode("ascii").strip()
                except OSError as exc:
                    self._drop()
                    if attempt:
                        raise CheckerUnavailable(f"honeychecker request failed: {exc}") from None
        raise AssertionError("unreachable")

    def _expect(self, reply, *ok):
        if reply in ok:
            return reply
        if reply.startswith("ERR "):
            raise ProtocolError(reply[4:])
        raise ProtocolError("SYNTAX", f"unexpected reply {reply!r}")

    def ping(self) -> bool:
        return self._expect(self.request("PING"), "PONG") == "PONG"

    def set(self, uid: str, k: int, true_index: int) -> None:
        self._expect(self.request(f"SET {uid} {k} {true_index}"), "OK")

    def check(self, uid: str, index: int) -> str:
        return self._expect(self.request(f"CHECK {uid} {index}"), REAL, HONEY)

    def remove(self, uid: str) -> None:
        self._expect(self.request(f"REMOVE {uid}"), "OK")

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class LocalChecker:
    """In-process stand-in with the client interface, for tests and simulation."""

    index: CheckerIndex
    sent: int = 0

    def request(self, line: str) -> str:
        self.sent += 1
        return handle_line(self.index, line)

    ping = CheckerClient.ping
    set = CheckerClient.set
    check = CheckerClient.check
    remove = CheckerClient.remove
    _expect = CheckerClient._expect
