#!/usr/bin/env python3
"""Attacker-performance and flatness sweep over several seeds.

Produces one CSV row per (seed, generator, level) plus a mean/sd summary on
stderr, which is the data behind an attacker-performance bar chart and a
flatness curve.  Defender and attacker models are trained on disjoint halves
of the corpus when ``--split`` is given, otherwise on the whole corpus.

    python scripts/run_sweep.py --users 500 --seeds 1 2 3 --out sweep.csv
"""

import argparse
import csv
import random
import statistics
import sys
import time
from collections import defaultdict

from honeyauth.gauntlet import CSV_HEADER, sweep, synth_accounts
from honeyauth.model import read_corpus, toy_corpus, train_model
from honeyauth.policyguard import Policy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--users", type=int, default=500)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--generators", default="typo,random,corpus,hybrid")
    ap.add_argument("--levels", default="A1,A2,A3,A4")
    ap.add_argument("--corpus")
    ap.add_argument("--split", action="store_true", help="train defender and attacker on disjoint halves")
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    corpus = read_corpus(args.corpus) if args.corpus else toy_corpus()
    if args.split:
        shuffled = list(corpus)
        random.Random(0).shuffle(shuffled)
        half = len(shuffled) // 2
        defender, attacker = train_model(shuffled[:half]), train_model(shuffled[half:])
    else:
        defender = attacker = train_model(corpus)

    policy = Policy()
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="", encoding="utf-8")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("seed",) + CSV_HEADER)
    summary = defaultdict(list)
    for seed in args.seeds:
        t0 = time.perf_counter()
        # users come from the attacker-side half so the defender never saw them
        users = synth_accounts(args.users, attacker, seed, policy)
        rows = sweep(args.generators.split(","), args.levels.split(","), users, seed, k=args.k,
                     defender_model=defender, attacker_corpus=attacker, policy=policy,
                     workers=args.workers)
        for row in rows:
            writer.writerow([seed] + row.as_csv())
            summary[(row.generator, row.level)].append(row.p_top1)
        print(f"seed {seed}: {len(rows)} rows in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    if out is not sys.stdout:
        out.close()

    print(f"{'generator':<8} {'level':<5} {'mean p':>8} {'sd':>7}", file=sys.stderr)
    for (gen, level), ps in sorted(summary.items()):
        sd = statistics.stdev(ps) if len(ps) > 1 else 0.0
        print(f"{gen:<8} {level:<5} {statistics.mean(ps):>8.4f} {sd:>7.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
