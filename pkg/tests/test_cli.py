import json
import os
import re
import subprocess
import sys
import threading
import time
from pathlib import Path

import pytest

from honeyauth import cli
from honeyauth.authgate import AlertLog, AuthHTTPServer, AuthService
from honeyauth.credstore import load_store
from honeyauth.honeychecker import CheckerClient, LocalChecker, CheckerIndex, start_server

SUBCOMMANDS = ["gen", "enroll", "validate-policy", "serve-checker", "serve-auth", "login",
               "simulate", "sweep", "crackcalc"]
SRC = Path(cli.__file__).resolve().parent


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help_everywhere(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([sub, "--help"])
    assert exc.value.code == 0
    assert "usage:" in capsys.readouterr().out


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["crackcalc", "--frobnicate"])
    assert exc.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1


def test_runtime_error_exit_2(capsys, tmp_path):
    code, out, err = run(capsys, "validate-policy", "--policy", str(tmp_path / "nope"),
                         "--store", str(tmp_path / "nope"))
    assert code == 2 and out == "" and "nope" in err


def test_crackcalc_example(capsys):
    code, out, _ = run(capsys, "crackcalc", "--length", "8", "--alphabet", "62", "--rate", "200000")
    assert code == 0 and "34.6" in out and "47.63" in out


def test_crackcalc_budget_and_tables(capsys):
    _, out, _ = run(capsys, "crackcalc", "--rate", "60", "--budget", "5e9")
    assert "2.64 yrs" in out
    _, out, _ = run(capsys, "crackcalc", "--tables")
    assert "115,313 yrs" in out and "12.86 d" in out
    code, _, _ = run(capsys, "crackcalc")
    assert code == 1


def test_crackcalc_uses_config_registry(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[kdf.bcrypt]\nbench_rate=100000\n")
    _, out, _ = run(capsys, "crackcalc", "--tables", "--config", str(cfg))
    assert "69.2 yrs" in out


def test_gen_example(capsys):
    code, out, _ = run(capsys, "gen", "--real", "password1", "--strategy", "typo", "--k", "4",
                       "--seed", "1", "--i-understand-plaintext")
    words = out.split()
    assert code == 0 and len(words) == 4 and words.count("password1") == 1


def test_gen_requires_plaintext_ack(capsys):
    code, out, err = run(capsys, "gen", "--real", "password1", "--strategy", "typo", "--k", "4")
    assert code == 1 and out == "" and "--i-understand-plaintext" in err


def test_gen_reports_generation_failure(capsys, tmp_path):
    pol = tmp_path / "p.conf"
    pol.write_text("minclass=4\n")
    code, _, err = run(capsys, "gen", "--real", "password1", "--strategy", "random", "--k", "4",
                       "--policy", str(pol), "--i-understand-plaintext")
    assert code == 2 and "MINCLASS" in err


@pytest.fixture
def pipeline(tmp_path, capsys):
    acc = tmp_path / "acc.jsonl"
    code, _, _ = run(capsys, "gen", "--synth", "30", "--strategy", "hybrid", "--k", "10", "--seed", "7",
                     "--i-understand-plaintext", "--out", str(acc))
    assert code == 0
    return tmp_path, acc


def test_enroll_forwards_indices_to_checker(pipeline, capsys):
    tmp_path, acc = pipeline
    server, _ = start_server()
    try:
        store = tmp_path / "store.jsonl"
        code, out, _ = run(capsys, "enroll", "--plaintexts", str(acc), "--store", str(store),
                           "--checker", server.address, "--seed", "7")
        assert code == 0 and json.loads(out)["enrolled"] == 30
        rows = [json.loads(line) for line in acc.read_text().splitlines()]
        assert len(server.index) == 30
        with CheckerClient(server.address) as c:
            for row in rows:
                assert c.check(row["uid"], row["true_index"]) == "REAL"
        text = store.read_text()
        assert "true_index" not in text and all(row["real"] not in text for row in rows)
        assert len(load_store(store)) == 30
    finally:
        server.shutdown()
        server.server_close()


def test_enroll_twice_is_runtime_error(pipeline, capsys):
    tmp_path, acc = pipeline
    store = tmp_path / "s.jsonl"
    assert run(capsys, "enroll", "--plaintexts", str(acc), "--store", str(store))[0] == 0
    code, _, err = run(capsys, "enroll", "--plaintexts", str(acc), "--store", str(store))
    assert code == 2 and "already enrolled" in err


def test_validate_policy(pipeline, capsys):
    tmp_path, acc = pipeline
    store = tmp_path / "s.jsonl"
    run(capsys, "enroll", "--plaintexts", str(acc), "--store", str(store))
    pol = tmp_path / "p.conf"
    pol.write_text("minlen=8\n")
    code, out, _ = run(capsys, "validate-policy", "--policy", str(pol), "--store", str(store),
                       "--plaintexts", str(acc))
    assert code == 0 and all(json.loads(line)["status"] == "OK" for line in out.splitlines())
    pol.write_text("minlen=12\n")
    code, out, _ = run(capsys, "validate-policy", "--policy", str(pol), "--store", str(store),
                       "--plaintexts", str(acc))
    assert code == 2
    assert any(json.loads(line)["status"] != "OK" for line in out.splitlines())


def test_simulate_twice_identical(pipeline, capsys):
    _, acc = pipeline
    argv = ["simulate", "--store-plaintexts", str(acc), "--generator", "hybrid", "--level", "A4",
            "--k", "10", "--seed", "7"]
    first = run(capsys, *argv)
    second = run(capsys, *argv, "--workers", "2")
    assert first[0] == 0 and first[1] == second[1]
    assert first[1].startswith("generator,level,accounts,k,p_top1,ci95,epsilon\nhybrid,A4,30,10,")


def test_sweep_csv(pipeline, capsys, tmp_path):
    _, acc = pipeline
    out_file = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--store-plaintexts", str(acc), "--generators", "random,corpus",
                       "--levels", "A1,A3", "--k", "10", "--seed", "7", "--out", str(out_file))
    lines = out.splitlines()
    assert code == 0 and len(lines) == 5 and lines[0].startswith("generator,")
    assert sum(1 for line in lines if line.startswith("generator,")) == 1
    assert out_file.read_text() == out
    code, _, _ = run(capsys, "sweep", "--store-plaintexts", str(acc), "--levels", "A9")
    assert code == 1


def test_login_client(capsys, tmp_path, pipeline):
    _, acc = pipeline
    store_path = tmp_path / "s.jsonl"
    run(capsys, "enroll", "--plaintexts", str(acc), "--store", str(store_path))
    row = json.loads(acc.read_text().splitlines()[0])
    checker = LocalChecker(CheckerIndex())
    checker.set(row["uid"], len(row["sweetwords"]), row["true_index"])
    alerts = AlertLog(tmp_path / "alerts.jsonl")
    httpd = AuthHTTPServer(("127.0.0.1", 0), AuthService(load_store(store_path), checker, alerts=alerts))
    threading.Thread(target=httpd.serve_forever, daemon=True).start()
    try:
        code, out, _ = run(capsys, "login", "--url", f"http://{httpd.address}/login",
                           "--uid", row["uid"], "--password", row["real"])
        assert code == 0 and json.loads(out) == {"status": "ok", "token_scope": "full"}
    finally:
        httpd.shutdown()
        httpd.server_close()
        alerts.close()


def test_serve_checker_honours_hc_bind(tmp_path):
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    env = dict(os.environ, HC_BIND=f"127.0.0.1:{port}")
    proc = subprocess.Popen([sys.executable, "-m", "honeyauth.cli", "serve-checker"], env=env,
                            stderr=subprocess.PIPE, text=True)
    try:
        assert f"127.0.0.1:{port}" in proc.stderr.readline()
        deadline = time.time() + 5
        while True:
            try:
                with CheckerClient(f"127.0.0.1:{port}") as c:
                    assert c.ping()
                break
            except Exception:
                if time.time() > deadline:
                    raise
                time.sleep(0.05)
    finally:
        proc.terminate()
        proc.wait(timeout=5)


def test_only_hc_bind_env_var_is_read():
    pattern = re.compile(r"(?:os\.environ|os\.getenv|getenv)\b[^\n]*")
    found = []
    for path in SRC.glob("*.py"):
        for line in path.read_text().splitlines():
            if pattern.search(line):
                found.append(line)
    assert found and all("HC_BIND" in line for line in found)
