#!/usr/bin/env python3
"""Measure single-core hashes/s for each registry profile on this machine.

The registry's ``bench_rate`` values are attacker-hardware figures used by
the crack-time tables; this script shows the defender-side cost of one
login under each profile.

    python scripts/bench_kdf.py [--profiles argon2id bcrypt scrypt] [--seconds 3]
"""

import argparse
import os
import time

from honeyauth.credstore import DEFAULT_PROFILES, SALT_BYTES, kdf_hash


def bench(profile, seconds):
    salt = os.urandom(SALT_BYTES)
    n, start = 0, time.perf_counter()
    while True:
        kdf_hash(f"password{n}", profile, salt)
        n += 1
        elapsed = time.perf_counter() - start
        if elapsed >= seconds and n >= 2:
            return n / elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profiles", nargs="+", default=list(DEFAULT_PROFILES))
    ap.add_argument("--seconds", type=float, default=3.0)
    args = ap.parse_args()
    print(f"{'profile':<16} {'local H/s':>12} {'ms/login':>10} {'registry rate':>14}")
    for pid in args.profiles:
        prof = DEFAULT_PROFILES[pid]
        rate = bench(prof, args.seconds)
        print(f"{pid:<16} {rate:>12,.1f} {1000 / rate:>10.2f} {prof.bench_rate:>14,.0f}")


if __name__ == "__main__":
    main()
