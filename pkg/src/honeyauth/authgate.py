"""Login middleware.

One KDF evaluation per attempt, a full constant-time scan of all k digests,
and a honeychecker round-trip only when some digest matched.  Honeyword hits
go to the responder and the alert log; the client-facing response never
says whether a honeyword was seen.
"""

from __future__ import annotations

import enum
import hmac
import json
import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .credstore import SALT_BYTES, UID_PATTERN, CredentialStore, SweetwordSet, kdf_hash
from .errors import CheckerUnavailable, ProtocolError
from .honeychecker import REAL
from .responder import ALLOW, ActionKind, ResponseAction, Responder, RiskContext

log = logging.getLogger(__name__)

_DUMMY_SALT = b"\x00" * SALT_BYTES


class Verdict(str, enum.Enum):
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"
    HONEY_DETECTED = "HONEY_DETECTED"


class FailMode(str, enum.Enum):
    FAIL_CLOSED = "FAIL_CLOSED"
    FAIL_OPEN_REAL_ONLY = "FAIL_OPEN_REAL_ONLY"


@dataclass(frozen=True)
class LoginRequest:
    uid: str
    password: str
    context: RiskContext = field(default_factory=RiskContext)


@dataclass(frozen=True)
class AuthOutcome:
    verdict: Verdict
    action: ResponseAction
    latency_ns: int
    index: int | None = None
    risk: float = 0.0


def match_index(record: SweetwordSet, digest: bytes, compare=hmac.compare_digest) -> int | None:
    """Position of ``digest`` among the record's digests, scanning all k.

    Every digest is compared even after a hit so the work done does not
    depend on where (or whether) the match is.
    """
    found = -1
    for i, stored in enumerate(record.digests):
        hit = compare(stored, digest)
        found = i if hit else found
    return None if found < 0 else found


def match_password(record: SweetwordSet, password: str, compare=hmac.compare_digest, profiles=None):
    return match_index(record, kdf_hash(password, record.kdf, record.salt, profiles), compare)


class AlertLog:
    """Append-only JSON-lines sink written by a background thread.

    Writes are queued so a slow or broken sink never delays or changes a
    login.  Failures are logged and kept in ``errors`` for the operator.
    """

    def __init__(self, path):
        self.path = Path(path) if path is not None else None
        self.errors: list[str] = []
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._run, name="alert-log", daemon=True)
        self._thread.start()

    def emit(self, event: dict) -> None:
        self._queue.put(event)

    def _run(self):
        while True:
            event = self._queue.get()
            try:
                if event is None:
                    return
                self._write(event)
            finally:
                self._queue.task_done()

    def _write(self, event):
        if self.path is None:
            return
        line = json.dumps(event, separators=(",", ":")) + "\n"
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
        except OSError as exc:
            msg = f"alert sink {self.path} unwritable: {exc}"
            self.errors.append(msg)
            log.error(msg)

    def flush(self):
        self._queue.join()

    def close(self):
        self._queue.put(None)
        self._thread.join()


def alert_event(uid, index, risk, action: ResponseAction, now: datetime) -> dict:
    return {
        "ts": now.isoformat(timespec="microseconds"),
        "uid": uid,
        "index": index,
        "risk": round(risk, 6),
        "action": str(action),
    }


def emit_alert(event: dict, sink: AlertLog) -> None:
    sink.emit(event)


def _utcnow():
    return datetime.now(timezone.utc)


def login(request: LoginRequest, store: CredentialStore, checker, responder: Responder,
          alerts: AlertLog | None = None, fail_mode: FailMode = FailMode.FAIL_CLOSED,
          now=None, profiles=None) -> AuthOutcome:
    """Authenticate one attempt.

    ``checker`` needs a ``check(uid, index) -> "REAL" | "HONEY"`` method.
    Under FAIL_OPEN_REAL_ONLY a matched password is accepted while the
    checker is down and a ``checker_unavailable`` event is logged; a
    non-matching password is always refused.
    """
    start = time.perf_counter_ns()
    now = now or _utcnow()
    record = store.get(request.uid) if UID_PATTERN.fullmatch(request.uid) else None
    if record is None:
        # burn one KDF evaluation so unknown uids cost the same as known ones
        kdf = next(iter(store.records.values())).kdf if store.records else "test-kdf"
        kdf_hash(request.password or "x", kdf, _DUMMY_SALT, profiles)
        return AuthOutcome(Verdict.FAILURE, ALLOW, time.perf_counter_ns() - start)

    index = match_password(record, request.password, profiles=profiles) if request.password else None
    if index is None:
        return AuthOutcome(Verdict.FAILURE, ALLOW, time.perf_counter_ns() - start)

    try:
        honey = checker.check(request.uid, index) != REAL
    except (CheckerUnavailable, ProtocolError, OSError) as exc:
        log.error("honeychecker failure for %s: %s", request.uid, exc)
        if alerts is not None:
            alerts.emit({"ts": now.isoformat(timespec="microseconds"), "uid": request.uid,
                         "index": None, "risk": None, "action": "checker_unavailable"})
        if fail_mode == FailMode.FAIL_OPEN_REAL_ONLY:
            return AuthOutcome(Verdict.SUCCESS, ALLOW, time.perf_counter_ns() - start, index=None)
        return AuthOutcome(Verdict.FAILURE, ALLOW, time.perf_counter_ns() - start)

    # the responder and event formatting run on both paths so real and honey
    # logins do equal work; only the enqueue differs
    risk, action = responder.respond(request.uid, request.context, honey, now)
    event = alert_event(request.uid, index, risk, action, now)
    if honey:
        if alerts is not None:
            emit_alert(event, alerts)
        return AuthOutcome(Verdict.HONEY_DETECTED, action, time.perf_counter_ns() - start, index, risk)
    return AuthOutcome(Verdict.SUCCESS, action, time.perf_counter_ns() - start, None, risk)


def client_response(outcome: AuthOutcome) -> dict:
    """What the caller sees.  Depends only on the action, never on the verdict."""
    if outcome.verdict == Verdict.FAILURE:
        return {"status": "denied", "token_scope": None}
    kind = outcome.action.kind
    if kind in (ActionKind.ALLOW, ActionKind.SILENT_LOG):
        return {"status": "ok", "token_scope": "full"}
    if kind == ActionKind.RESTRICTED_TOKEN:
        return {"status": "ok", "token_scope": "restricted"}
    if kind == ActionKind.STEP_UP_AUTH:
        return {"status": "denied", "token_scope": None, "challenge": "mfa"}
    return {"status": "denied", "token_scope": None}


class AuthService:
    """Everything a login needs, bundled for the HTTP front end."""

    def __init__(self, store, checker, responder=None, alerts=None,
                 fail_mode=FailMode.FAIL_CLOSED, policy=None):
        self.store = store
        self.checker = checker
        self.responder = responder or Responder()
        self.alerts = alerts
        self.fail_mode = fail_mode
        self.policy = policy

    def login(self, request: LoginRequest) -> AuthOutcome:
        return login(request, self.store, self.checker, self.responder, self.alerts, self.fail_mode)


class _LoginHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.debug("%s - " + fmt, self.address_string(), *args)

    def _send(self, code, body):
        data = json.dumps(body).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_POST(self):
        if self.path != "/login":
            self._send(404, {"error": "not found"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(min(length, 65536)) or b"{}")
            request = LoginRequest(
                uid=str(body["uid"]),
                password=str(body["password"]),
                context=RiskContext.from_dict(body.get("context")),
            )
        except (ValueError, KeyError, TypeError, AttributeError):
            self._send(400, {"error": "bad request"})
            return
        outcome = self.server.service.login(request)
        self._send(200, client_response(outcome))


class AuthHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, service: AuthService):
        self.service = service
        super().__init__(address, _LoginHandler)

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"
