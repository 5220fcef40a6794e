#!/usr/bin/env python3
"""Write synthetic (uid, real, pii) accounts as JSON lines.

A share of users (``--pii-rate``) derive their password from their own name
and birth year; the rest draw a policy-compliant password from the corpus.

    python scripts/make_accounts.py --n 500 --seed 7 --out accounts.jsonl
"""

import argparse
import json

from honeyauth.gauntlet import synth_accounts
from honeyauth.model import read_corpus, toy_corpus, train_model
from honeyauth.policyguard import Policy, load_policy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--pii-rate", type=float, default=0.35)
    ap.add_argument("--corpus", help="default: bundled toy corpus")
    ap.add_argument("--policy")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    model = train_model(read_corpus(args.corpus) if args.corpus else toy_corpus())
    policy = load_policy(args.policy) if args.policy else Policy()
    users = synth_accounts(args.n, model, args.seed, policy, pii_rate=args.pii_rate)
    with open(args.out, "w", encoding="utf-8") as fh:
        for uid, real, pii in users:
            fh.write(json.dumps({"uid": uid, "real": real, "pii": pii.to_dict()}, separators=(",", ":")) + "\n")
    print(f"wrote {len(users)} accounts to {args.out}")


if __name__ == "__main__":
    main()
