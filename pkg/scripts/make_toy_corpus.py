#!/usr/bin/env python3
"""Build the bundled 5,000-line synthetic password corpus.

No leaked data is used.  Passwords are composed from common words, first
names, years, digit runs, keyboard walks and symbols, with Zipf-like
popularity so that frequent choices repeat the way they do in real leaks.

    python scripts/make_toy_corpus.py [--out src/honeyauth/data/toy_corpus.txt]
"""

import argparse
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "honeyauth" / "data"

WORDS = """love baby angel star sweet monkey dragon tiger lucky happy sunny summer
winter spring flower soccer hockey music money power magic secret silver golden
purple orange cherry cookie candy honey sugar peanut pepper chicken rabbit kitty
puppy lover friend family forever jesus heaven rainbow shadow master killer
hunter ranger rocket pirate ninja panda bear wolf eagle falcon phoenix thunder
storm ocean river forest garden pretty beauty princess prince queen king
diamond crystal pearl ruby blue black white green pink yellow red smile dream
hello welcome letmein sunshine butterfly chocolate banana apple orange mango
football baseball basket player gamer matrix zombie batman superman spider
mickey minnie barbie disney pokemon mario sonic yankees cowboys lakers
""".split()

WALKS = ["qwerty", "asdfgh", "zxcvbn", "qazwsx", "1qaz2wsx", "qwertyuiop", "asdfghjkl",
         "1q2w3e4r", "q1w2e3r4", "zaq12wsx", "poiuyt", "mnbvcx"]
SYMBOLS = "!@#$*.?_-"
LEET = str.maketrans({"a": "@", "e": "3", "o": "0", "i": "1", "s": "$"})


def zipf_pick(rng, items, s=1.1):
    weights = [1.0 / (rank + 1) ** s for rank in range(len(items))]
    return rng.choices(items, weights=weights)[0]


def digits(rng):
    roll = rng.random()
    if roll < 0.35:
        return str(rng.randint(1965, 2012))
    if roll < 0.55:
        return f"{rng.randint(0, 99):02d}"
    if roll < 0.7:
        return rng.choice(["1", "12", "123", "1234", "007", "69", "11", "22"])
    return str(rng.randint(0, 999))


def make_password(rng, names, common):
    word = zipf_pick(rng, WORDS)
    name = zipf_pick(rng, names)
    roll = rng.random()
    if roll < 0.14:
        return zipf_pick(rng, common, s=1.0)
    if roll < 0.36:
        return word + digits(rng)
    if roll < 0.50:
        return name + digits(rng)
    if roll < 0.58:
        return (word if rng.random() < 0.6 else name).capitalize() + digits(rng) + rng.choice(SYMBOLS)
    if roll < 0.66:
        return word + zipf_pick(rng, WORDS)
    if roll < 0.72:
        return word + name
    if roll < 0.79:
        return "".join(rng.choice("0123456789") for _ in range(rng.randint(6, 10)))
    if roll < 0.85:
        return rng.choice(WALKS) + rng.choice(["", "1", "12", "123", "!"])
    if roll < 0.92:
        return word.translate(LEET) + digits(rng)
    return word + rng.choice(SYMBOLS) + digits(rng)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(DATA / "toy_corpus.txt"))
    ap.add_argument("--lines", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=2026)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    names = json.loads((DATA / "names.json").read_text())["first"]
    common = (DATA / "common_passwords.txt").read_text().split()
    lines = [make_password(rng, names, common) for _ in range(args.lines)]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} passwords ({len(set(lines))} distinct) to {args.out}")


if __name__ == "__main__":
    main()
