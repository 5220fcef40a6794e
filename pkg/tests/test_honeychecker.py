import pickle
import socket
import threading

import pytest

from honeyauth.errors import CheckerUnavailable, ProtocolError
from honeyauth.honeychecker import (
    CheckerClient,
    CheckerIndex,
    LocalChecker,
    handle_line,
    pad,
    resolve_bind,
    start_server,
)


@pytest.fixture
def index():
    return CheckerIndex()


def run(index, *lines):
    return [handle_line(index, line) for line in lines]


def test_set_and_range(index):
    assert run(index, "SET alice 20 7", "SET alice 20 20") == ["OK", "ERR RANGE"]


def test_last_write_wins(index):
    assert run(index, "SET alice 20 3", "SET alice 20 9", "CHECK alice 9", "CHECK alice 3") == [
        "OK", "OK", "REAL", "HONEY"]


def test_check(index):
    run(index, "SET alice 20 3")
    assert run(index, "CHECK alice 3", "CHECK alice 2", "CHECK bob 0", "CHECK alice 20") == [
        "REAL", "HONEY", "ERR UNKNOWN", "ERR RANGE"]


def test_remove_idempotent_and_reenroll(index):
    run(index, "SET alice 20 3")
    assert run(index, "REMOVE alice", "CHECK alice 3", "REMOVE alice") == ["OK", "ERR UNKNOWN", "OK"]
    assert run(index, "SET alice 20 3", "CHECK alice 3") == ["OK", "REAL"]


@pytest.mark.parametrize("line", [
    "", "PING extra", "SET alice 20", "SET alice x 3", "SET alice 20 -1", "SET al!ce 20 3",
    "CHECK alice 01", "check alice 1", "SET alice  20 3", "REMOVE " + "a" * 65,
])
def test_syntax_errors(index, line):
    assert handle_line(index, line) == "ERR SYNTAX"


def test_ping(index):
    assert handle_line(index, "PING\n") == "PONG"


def test_reply_widths():
    for r in ("OK", "REAL", "HONEY", "PONG"):
        assert len(pad(r)) == 8 and pad(r).endswith(b"\n")
    for r in ("ERR RANGE", "ERR UNKNOWN", "ERR SYNTAX"):
        assert len(pad(r)) == 12


def test_index_refuses_pickle(index):
    with pytest.raises(TypeError):
        pickle.dumps(index)


def test_bind_precedence(monkeypatch):
    monkeypatch.delenv("HC_BIND", raising=False)
    assert resolve_bind() == "127.0.0.1:7379"
    monkeypatch.setenv("HC_BIND", "127.0.0.1:9000")
    assert resolve_bind() == "127.0.0.1:9000"
    assert resolve_bind("0.0.0.0:1") == "0.0.0.0:1"


@pytest.fixture
def server():
    srv, _ = start_server()
    yield srv
    srv.shutdown()
    srv.server_close()


def test_tcp_round_trip(server):
    with CheckerClient(server.address) as c:
        assert c.ping()
        c.set("alice", 20, 3)
        assert c.check("alice", 3) == "REAL"
        assert c.check("alice", 4) == "HONEY"
        with pytest.raises(ProtocolError) as exc:
            c.check("bob", 0)
        assert exc.value.code == "UNKNOWN"
        c.remove("alice")
        assert c.sent == 6


def test_raw_wire_format(server):
    host, port = server.address.rsplit(":", 1)
    with socket.create_connection((host, int(port))) as s:
        s.sendall(b"SET a 3 1\nCHECK a 1\nCHECK a 0\nCHECK zz 0\nBOGUS\n")
        want = 8 * 3 + 12 * 2
        data = b""
        while len(data) < want:
            data += s.recv(4096)
    assert data == b"OK     \nREAL   \nHONEY  \nERR UNKNOWN\nERR SYNTAX \n"


def test_overlong_line_rejected(server):
    host, port = server.address.rsplit(":", 1)
    with socket.create_connection((host, int(port))) as s:
        s.sendall(b"SET " + b"a" * 400 + b" 3 1\n")
        assert s.recv(64) == b"ERR SYNTAX \n"


def test_concurrent_clients(server):
    errors = []

    def worker(n):
        try:
            with CheckerClient(server.address) as c:
                for i in range(50):
                    uid = f"u{n}_{i}"
                    c.set(uid, 10, i % 10)
                    assert c.check(uid, i % 10) == "REAL"
        except Exception as exc:  # surfaced below
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(n,)) for n in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(server.index) == 400


def test_unreachable_checker():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    with pytest.raises(CheckerUnavailable):
        CheckerClient(f"127.0.0.1:{port}", timeout=0.5).ping()


def test_local_checker_matches_protocol(index):
    lc = LocalChecker(index)
    lc.set("alice", 5, 2)
    assert lc.check("alice", 2) == "REAL" and lc.check("alice", 1) == "HONEY"
    with pytest.raises(ProtocolError):
        lc.check("alice", 5)
    assert lc.sent == 4
