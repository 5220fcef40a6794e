"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Machine-readable
output goes to stdout and diagnostics to stderr.  Commands that print
plaintext decoys require ``--i-understand-plaintext``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import credstore, crackcalc, gauntlet, honeychecker
from .config import load_config
from .decoygen import STRATEGIES, GeneratorConfig, PiiRecord, assemble_sweetwords, derive_seed, generate
from .errors import HoneyauthError
from .model import read_corpus, toy_corpus, train_model
from .policyguard import check_sweetword_set, load_policy

log = logging.getLogger("honeyauth")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="INI config with [policy], [responder], [kdf.<id>] sections")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")


def _model_args(p):
    p.add_argument("--corpus", help="training corpus, one password per line (default: bundled toy corpus)")
    p.add_argument("--order", type=int, default=3, help="Markov order (default 3)")
    p.add_argument("--policy", help="pwquality-style policy file")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="honeyauth", description="Honeyword-augmented authentication toolkit")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate sweetword sets (prints plaintext decoys)")
    _common(p)
    _model_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--real", help="one real password; prints its k sweetwords")
    src.add_argument("--accounts", help="JSON-lines accounts file with uid, real and optional pii")
    src.add_argument("--synth", type=int, metavar="N", help="synthesize N accounts from the corpus")
    p.add_argument("--strategy", choices=STRATEGIES, default="hybrid")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--d-min", type=int, default=None, help="minimum edit distance (default 2; 1 for typo)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pii", help="PII JSON for --real, e.g. '{\"names\": [\"maria\"], \"birth_year\": 1987}'")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="also write the JSON lines here")
    p.add_argument("--i-understand-plaintext", action="store_true", dest="plaintext_ok",
                   help="acknowledge that decoys are printed in plaintext")

    p = sub.add_parser("enroll", help="hash plaintext sweetword sets into a credential store")
    _common(p)
    p.add_argument("--plaintexts", required=True, help="JSON lines from `gen`")
    p.add_argument("--store", required=True)
    p.add_argument("--kdf", default="test-kdf")
    p.add_argument("--checker", help="honeychecker HOST:PORT to receive true indices")
    p.add_argument("--seed", type=int, help="derive salts from this seed (reproducible runs only)")

    p = sub.add_parser("validate-policy", help="check a policy and stored sweetword sets")
    _common(p)
    p.add_argument("--policy", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--plaintexts", help="plaintext sweetword sets to check member by member")

    p = sub.add_parser("serve-checker", help="run the honeychecker (address from --bind or HC_BIND)")
    _common(p)
    p.add_argument("--bind", help=f"HOST:PORT (default {honeychecker.DEFAULT_BIND})")
    p.add_argument("--max-connections", type=int, default=64)

    p = sub.add_parser("serve-auth", help="run the demo HTTP login service")
    _common(p)
    p.add_argument("--store", required=True)
    p.add_argument("--checker", required=True, help="honeychecker HOST:PORT")
    p.add_argument("--policy", required=True)
    p.add_argument("--alerts", required=True, help="alert log (JSON lines, appended)")
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--fail-mode", choices=["FAIL_CLOSED", "FAIL_OPEN_REAL_ONLY"], default="FAIL_CLOSED")

    p = sub.add_parser("login", help="test client for serve-auth")
    _common(p)
    p.add_argument("--url", default="http://127.0.0.1:8080/login")
    p.add_argument("--uid", required=True)
    p.add_argument("--password", required=True)
    p.add_argument("--context", default="{}", help="risk context JSON")

    for name, helptext in (("simulate", "run one attacker level against one generator"),
                           ("sweep", "all (generator, level) pairs as CSV")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        _model_args(p)
        p.add_argument("--store-plaintexts", required=True, dest="plaintexts",
                       help="JSON-lines accounts (uid, real, optional pii)")
        if name == "simulate":
            p.add_argument("--generator", choices=STRATEGIES, required=True)
            p.add_argument("--level", choices=[lv.value for lv in gauntlet.Level], required=True)
        else:
            p.add_argument("--generators", default="random,corpus,hybrid")
            p.add_argument("--levels", default="A1,A2,A3,A4")
        p.add_argument("--k", type=int, default=20)
        p.add_argument("--d-min", type=int, default=2)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", help="also write the CSV here")

    p = sub.add_parser("crackcalc", help="entropy and crack-time arithmetic")
    _common(p)
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--alphabet", type=int, default=62)
    p.add_argument("--rate", type=float, help="guesses per second")
    p.add_argument("--budget", type=float, help="guess budget instead of the full keyspace")
    p.add_argument("--tables", action="store_true", help="print the registry crack-time tables")
    return ap


# -- helpers ----------------------------------------------------------------

def _policy(args, cfg):
    if getattr(args, "policy", None):
        return load_policy(args.policy)
    return cfg.policy


def _model(args):
    corpus = read_corpus(args.corpus) if args.corpus else toy_corpus()
    return train_model(corpus, order=args.order)


def _write(text, out=None):
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text, encoding="utf-8")


def _read_jsonl(path):
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if line.strip():
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise HoneyauthError(f"{path}:{lineno}: {exc}") from None
    return rows


# -- commands ---------------------------------------------------------------

def cmd_gen(args, cfg):
    if not args.plaintext_ok:
        raise UsageError("gen prints plaintext decoys; pass --i-understand-plaintext")
    d_min = args.d_min if args.d_min is not None else (1 if args.strategy == "typo" else 2)
    gcfg = GeneratorConfig(strategy=args.strategy, k=args.k, d_min=d_min, seed=args.seed,
                           policy=_policy(args, cfg))
    model = _model(args) if args.strategy in ("corpus", "hybrid") or args.synth else None

    if args.real is not None:
        pii = PiiRecord.from_dict(json.loads(args.pii)) if args.pii else None
        decoys = generate(args.real, gcfg, model=model, pii=pii)
        sweetwords, _ = assemble_sweetwords(args.real, decoys, derive_seed(args.seed, "cli"))
        _write("".join(sw + "\n" for sw in sweetwords), args.out)
        return 0

    if args.synth:
        users = gauntlet.synth_accounts(args.synth, model, args.seed, gcfg.policy)
    else:
        users = gauntlet.read_accounts(args.accounts)
    lines = []
    for acct in gauntlet.generate_accounts(users, gcfg, model, args.seed, args.workers):
        sweetwords, index = assemble_sweetwords(acct.real, acct.decoys,
                                                derive_seed(args.seed, "assemble", acct.uid))
        rec = {"uid": acct.uid, "real": acct.real, "sweetwords": sweetwords, "true_index": index,
               "pii": acct.pii.to_dict() if acct.pii else None}
        lines.append(json.dumps(rec, separators=(",", ":")) + "\n")
    _write("".join(lines), args.out)
    return 0


def cmd_enroll(args, cfg):
    path = Path(args.store)
    store = credstore.load_store(path) if path.exists() else credstore.CredentialStore()
    checker = honeychecker.CheckerClient(args.checker) if args.checker else None
    if checker is None:
        log.warning("no --checker given: true indices are not forwarded anywhere")
    enrolled = []
    for row in _read_jsonl(args.plaintexts):
        uid, sweetwords, index = row["uid"], row["sweetwords"], row["true_index"]
        salt = credstore.derive_salt(args.seed, uid) if args.seed is not None else None
        credstore.enroll(uid, sweetwords[index], sweetwords, index, args.kdf, store,
                         salt=salt, profiles=cfg.profiles)
        enrolled.append((uid, len(sweetwords), index))
    credstore.save_store(store, path)
    if checker is not None:
        with checker:
            for uid, k, index in enrolled:
                checker.set(uid, k, index)
    print(json.dumps({"enrolled": len(enrolled), "store": str(path)}))
    return 0


def cmd_validate_policy(args, cfg):
    policy = load_policy(args.policy)
    store = credstore.load_store(args.store)
    bad = 0
    for rec in store:
        if rec.kdf not in cfg.profiles:
            print(json.dumps({"uid": rec.uid, "status": "UNKNOWN_KDF", "kdf": rec.kdf}))
            bad += 1
    if args.plaintexts:
        for row in _read_jsonl(args.plaintexts):
            uid = row["uid"]
            report = check_sweetword_set(policy, row["sweetwords"])
            out = {"uid": uid, **report.to_dict()}
            if uid in store and store.get(uid).k != len(row["sweetwords"]):
                out["status"] = "K_MISMATCH"
            if out["status"] != "OK":
                bad += 1
            print(json.dumps(out))
    print(f"{len(store)} stored records, {bad} problem(s)", file=sys.stderr)
    return 2 if bad else 0


def cmd_serve_checker(args, cfg):
    bind = honeychecker.resolve_bind(args.bind)
    server = honeychecker.CheckerServer(honeychecker.parse_addr(bind), max_connections=args.max_connections)
    print(f"honeychecker listening on {server.address}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_serve_auth(args, cfg):
    from .authgate import AlertLog, AuthHTTPServer, AuthService, FailMode
    from .responder import Responder

    policy = load_policy(args.policy)
    store = credstore.load_store(args.store)
    alerts = AlertLog(args.alerts)
    service = AuthService(store, honeychecker.CheckerClient(args.checker), Responder(cfg.responder),
                          alerts, FailMode(args.fail_mode), policy)
    server = AuthHTTPServer(honeychecker.parse_addr(args.bind), service)
    print(f"auth service listening on {server.address}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        alerts.close()
    return 0


def cmd_login(args, cfg):
    import urllib.request

    body = json.dumps({"uid": args.uid, "password": args.password,
                       "context": json.loads(args.context)}).encode()
    req = urllib.request.Request(args.url, data=body, headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=10) as resp:
        print(resp.read().decode())
    return 0


def _users(args):
    return gauntlet.read_accounts(args.plaintexts)


def cmd_simulate(args, cfg):
    policy = _policy(args, cfg)
    model = _model(args)
    gcfg = GeneratorConfig(strategy=args.generator, k=args.k, d_min=args.d_min, seed=args.seed, policy=policy)
    accounts = gauntlet.generate_accounts(_users(args), gcfg, model if args.generator in ("corpus", "hybrid") else None,
                                          args.seed, args.workers)
    attacker = gauntlet.AttackerModel.for_level(args.level, model)
    rep = gauntlet.simulate(accounts, attacker, args.seed, workers=args.workers)
    row = gauntlet.SweepRow(args.generator, args.level, rep.accounts, rep.k, rep.p, rep.ci95, rep.epsilon)
    _write(gauntlet.rows_to_csv([row]), args.out)
    return 0


def cmd_sweep(args, cfg):
    model = _model(args)
    gens = [g for g in args.generators.split(",") if g]
    levels = [lv for lv in args.levels.split(",") if lv]
    for g in gens:
        if g not in STRATEGIES:
            raise UsageError(f"unknown generator {g!r}")
    for lv in levels:
        if lv not in gauntlet.Level.__members__:
            raise UsageError(f"unknown level {lv!r}")
    rows = gauntlet.sweep(gens, levels, _users(args), args.seed, k=args.k, defender_model=model,
                          attacker_corpus=model, policy=_policy(args, cfg), d_min=args.d_min,
                          workers=args.workers)
    _write(gauntlet.rows_to_csv(rows), args.out)
    return 0


def cmd_crackcalc(args, cfg):
    if args.tables:
        sys.stdout.write(crackcalc.render_tables([cfg.profiles[p] for p in credstore.TABLE_PROFILES]))
        if args.rate is None:
            return 0
    if args.rate is None:
        raise UsageError("--rate is required unless --tables is given")
    h = crackcalc.entropy_bits(args.length, args.alphabet)
    if args.budget is not None:
        t = crackcalc.budget_time(args.budget, args.rate)
        guesses = args.budget
    else:
        t = crackcalc.exhaustive_time(args.length, args.alphabet, args.rate)
        guesses = crackcalc.keyspace(args.length, args.alphabet)
    print(f"entropy_bits={h:.2f} guesses={guesses:.4e} rate={args.rate:g}/s "
          f"seconds={t.seconds:.6g} time={t.human()}")
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "enroll": cmd_enroll,
    "validate-policy": cmd_validate_policy,
    "serve-checker": cmd_serve_checker,
    "serve-auth": cmd_serve_auth,
    "login": cmd_login,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "crackcalc": cmd_crackcalc,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"honeyauth {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (HoneyauthError, OSError, ValueError, KeyError) as exc:
        print(f"honeyauth {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
