"""Attacker models A1-A4, distinguishing-attack simulation and flatness sweeps.

An attacker sees one account's k sweetwords (and, at A4, the account's PII)
and ranks them most-likely-real first.  Top-1 success p over many accounts
maps to a flatness score normalized between the random baseline 1/k
(flatness 1) and certain success (flatness 0).
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .decoygen import GeneratorConfig, PiiRecord, assemble_sweetwords, derive_seed, generate
from .errors import ConfigError
from .model import CorpusModel, segments
from .policyguard import Policy, class_counts, longest_run, passes

CSV_HEADER = ("generator", "level", "accounts", "k", "p_top1", "ci95", "epsilon")


class Level(str, enum.Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"


@lru_cache(maxsize=None)
def builtin_dictionary() -> dict[str, int]:
    """A1's small dictionary: password -> popularity rank."""
    text = resources.files("honeyauth").joinpath("data/common_passwords.txt").read_text("utf-8")
    return {pw: rank for rank, pw in enumerate(text.split())}


@dataclass(frozen=True)
class AttackerModel:
    level: Level
    corpus: CorpusModel | None = None
    trained: CorpusModel | None = None
    pii_access: bool = False
    guess_budget_per_account: int = 1
    freq_weight: float = 1.0
    pii_weight: float = 1.0
    pii_token_prob: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "level", Level(self.level))
        if self.level in (Level.A1, Level.A2) and (self.corpus or self.trained):
            raise ConfigError(f"{self.level.value} attackers hold no corpus")
        if self.guess_budget_per_account < 1:
            raise ConfigError("guess budget must be >= 1")

    @classmethod
    def for_level(cls, level, model: CorpusModel | None = None, **kwargs) -> "AttackerModel":
        """Standard attacker for ``level``; A3/A4 take their resources from ``model``."""
        level = Level(level)
        if level in (Level.A1, Level.A2):
            return cls(level, **kwargs)
        if level == Level.A3:
            return cls(level, corpus=model, **kwargs)
        return cls(level, corpus=model, trained=model, pii_access=True, **kwargs)


# A2's plausibility table: a human password is near typical length, uses
# one or two character classes, few segments and no long runs.
A2_TYPICAL_LENGTH = 9.0
A2_LENGTH_SD = 2.5
A2_CLASS_PRIOR = {1: math.log(0.35), 2: math.log(0.45), 3: math.log(0.15), 4: math.log(0.05)}
A2_SEGMENT_PENALTY = 0.7
A2_REPEAT_PENALTY = 1.0


def plausibility(pw: str) -> float:
    """Intrinsic plausibility score used by A2 (higher = more human-like)."""
    z = (len(pw) - A2_TYPICAL_LENGTH) / A2_LENGTH_SD
    classes = sum(1 for n in class_counts(pw).values() if n)
    nseg = len(segments(pw))
    score = -0.5 * z * z
    score += A2_CLASS_PRIOR.get(classes, math.log(0.05))
    score -= A2_SEGMENT_PENALTY * max(0, nseg - 2)
    score -= A2_REPEAT_PENALTY * max(0, longest_run(pw) - 2)
    return score


def _pii_spans(pw: str, pii: PiiRecord | None) -> list[tuple[int, int]]:
    """Non-overlapping (start, end) spans of PII tokens in ``pw``, longest first."""
    if pii is None:
        return []
    low = pw.lower()
    tokens = sorted({t for t in pii.letter_tokens() if len(t) >= 3} | set(pii.digit_tokens()),
                    key=lambda t: (-len(t), t))
    taken = [False] * len(pw)
    spans = []
    for tok in tokens:
        start = low.find(tok)
        while start >= 0:
            end = start + len(tok)
            if not any(taken[start:end]):
                spans.append((start, end))
                taken[start:end] = [True] * len(tok)
            start = low.find(tok, start + 1)
    return sorted(spans)


def pii_overlap(pw: str, pii: PiiRecord | None) -> int:
    """Number of PII token occurrences in ``pw``."""
    return len(_pii_spans(pw, pii))


def a4_score(model: AttackerModel, pw: str, pii: PiiRecord | None) -> float:
    """Log-likelihood + frequency bonus + PII bonus.

    The PII bonus re-scores each matched token as one insertion with
    probability ``pii_token_prob`` instead of paying the Markov cost of its
    characters, so a password built from the user's own name and birth year
    is as likely as its structure, not as its spelling.
    """
    trained = model.trained
    score = trained.log_likelihood(pw)
    score += model.freq_weight * math.log1p(model.corpus.count(pw))
    if model.pii_access:
        for start, end in _pii_spans(pw, pii):
            token_cost = sum(trained.char_logprob(pw[:i], pw[i]) for i in range(start, end))
            score += model.pii_weight * (math.log(model.pii_token_prob) - token_cost)
    return score


def attacker_rank(model: AttackerModel, sweetwords: Sequence[str], pii: PiiRecord | None = None) -> list[int]:
    """Indices of ``sweetwords`` ordered most-likely-real first.

    A1: dictionary rank, then lexicographic.  A2: plausibility table.
    A3: corpus frequency, ties by plausibility.  A4: PCFG+Markov
    log-likelihood plus corpus frequency plus PII overlap.  Remaining ties
    fall back to lexicographic order, then position.
    """
    level = model.level
    idx = range(len(sweetwords))
    if level == Level.A1:
        d = builtin_dictionary()
        key = lambda i: (0, d[sweetwords[i]], "", i) if sweetwords[i] in d else (1, 0, sweetwords[i], i)  # noqa: E731
    elif level == Level.A2:
        key = lambda i: (-plausibility(sweetwords[i]), sweetwords[i], i)  # noqa: E731
    elif level == Level.A3:
        if model.corpus is None:
            raise ConfigError("A3 attacker needs a corpus model")
        key = lambda i: (-model.corpus.count(sweetwords[i]), -plausibility(sweetwords[i]), sweetwords[i], i)  # noqa: E731
    else:
        if model.corpus is None or model.trained is None:
            raise ConfigError("A4 attacker needs corpus and trained models")
        key = lambda i: (-a4_score(model, sweetwords[i], pii), sweetwords[i], i)  # noqa: E731
    return sorted(idx, key=key)


def uniform_ranker(sweetwords, pii, rng) -> list[int]:
    """Baseline attacker that guesses uniformly at random."""
    order = list(range(len(sweetwords)))
    rng.shuffle(order)
    return order


@dataclass(frozen=True)
class Account:
    real: str
    decoys: tuple[str, ...]
    pii: PiiRecord | None = None
    uid: str = ""

    @property
    def k(self):
        return len(self.decoys) + 1


@dataclass(frozen=True)
class FlatnessReport:
    level: str
    k: int
    accounts: int
    hits: int
    p: float
    epsilon: float
    ci95: float


def flatness_score(p: float, k: int) -> float:
    if k < 2:
        raise ConfigError("k must be >= 2")
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"p must lie in [0, 1], got {p}")
    baseline = 1.0 / k
    eps = 1.0 - (p - baseline) / (1.0 - baseline)
    return min(1.0, max(0.0, eps))


def _account_hit(account: Account, model, seed, budget) -> bool:
    aseed = derive_seed(seed, "simulate", account.uid, account.real, *account.decoys)
    sweetwords, true_index = assemble_sweetwords(account.real, account.decoys, aseed)
    if isinstance(model, AttackerModel):
        order = attacker_rank(model, sweetwords, account.pii)
    else:
        order = model(sweetwords, account.pii, random.Random(derive_seed(aseed, "ranker")))
    return true_index in order[:budget]


def _count_hits(chunk, model, seed, budget) -> int:
    return sum(_account_hit(a, model, seed, budget) for a in chunk)


def _chunks(seq, n):
    size = max(1, math.ceil(len(seq) / n))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def simulate(accounts: Sequence[Account], model: AttackerModel | Callable, seed: int,
             workers: int = 1, budget: int | None = None, label: str | None = None) -> FlatnessReport:
    """Top-``budget`` success rate of ``model`` over ``accounts``.

    Each account's sweetword order and ranker randomness come from a stream
    keyed by the account's contents, so the result does not depend on
    account order or on ``workers``.  A plain callable
    ``(sweetwords, pii, rng) -> order`` may stand in for an AttackerModel.
    """
    accounts = list(accounts)
    if not accounts:
        raise ConfigError("simulate needs at least one account")
    ks = {a.k for a in accounts}
    if len(ks) != 1:
        raise ConfigError(f"ragged sweetword sets: k values {sorted(ks)}")
    k = ks.pop()
    if budget is None:
        budget = model.guess_budget_per_account if isinstance(model, AttackerModel) else 1
    if isinstance(model, AttackerModel):
        label = label or model.level.value
    label = label or getattr(model, "__name__", "custom")

    if workers > 1 and len(accounts) > 1:
        chunks = _chunks(accounts, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(_count_hits, chunks, [model] * len(chunks),
                                [seed] * len(chunks), [budget] * len(chunks)))
    else:
        hits = _count_hits(accounts, model, seed, budget)

    n = len(accounts)
    p = hits / n
    ci = 1.96 * math.sqrt(p * (1 - p) / n)
    return FlatnessReport(label, k, n, hits, p, flatness_score(p, k), ci)


# -- synthetic accounts ----------------------------------------------------

@lru_cache(maxsize=None)
def _names():
    return json.loads(resources.files("honeyauth").joinpath("data/names.json").read_text("utf-8"))


def synth_pii(rng) -> PiiRecord:
    names = _names()
    first = rng.choice(names["first"])
    last = rng.choice(names["last"])
    year = rng.randint(1955, 2006)
    handle = rng.choice([first + last[0], first[0] + last, first + str(rng.randint(1, 99)), first + "_" + last])
    return PiiRecord(username=handle, birth_year=year, names=(first, last))


def _pii_password(pii: PiiRecord, rng) -> str:
    first, last = pii.names[0], pii.names[1]
    year = f"{pii.birth_year:04d}"
    word = rng.choice([first, first, last, first + last[0]])
    if rng.random() < 0.3:
        word = word.capitalize()
    tail = rng.choice([year, year, year[2:], year[2:] + "!", year + "!"])
    return word + tail


def synth_accounts(n: int, model: CorpusModel, seed: int, policy: Policy = Policy(),
                   pii_rate: float = 0.35) -> list[tuple[str, str, PiiRecord]]:
    """``n`` synthetic (uid, real, pii) accounts.

    A ``pii_rate`` share of users build their password from their own name
    and birth year; the rest pick a policy-compliant password from the
    corpus distribution.
    """
    out = []
    for i in range(n):
        rng = random.Random(derive_seed(seed, "account", i))
        pii = synth_pii(rng)
        real = None
        if rng.random() < pii_rate:
            for _ in range(20):
                cand = _pii_password(pii, rng)
                if passes(policy, cand):
                    real = cand
                    break
        while real is None:
            cand = model.sample_password(rng)
            if passes(policy, cand):
                real = cand
        out.append((f"user{i:05d}", real, pii))
    return out


# -- generation + sweep ----------------------------------------------------

def _generate_one(args):
    uid, real, pii, cfg, model, seed = args
    decoys = generate(real, cfg, model=model, pii=pii, seed=derive_seed(seed, "gen", cfg.strategy, uid, real))
    return Account(real, tuple(decoys), pii, uid)


def generate_accounts(users, cfg: GeneratorConfig, model: CorpusModel | None, seed: int,
                      workers: int = 1) -> list[Account]:
    """Decoys for every (uid, real, pii) in ``users`` under one generator."""
    jobs = [(uid, real, pii, cfg, model, seed) for uid, real, pii in users]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_generate_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_generate_one(job) for job in jobs]


@dataclass(frozen=True)
class SweepRow:
    generator: str
    level: str
    accounts: int
    k: int
    p_top1: float
    ci95: float
    epsilon: float

    def as_csv(self):
        return [self.generator, self.level, self.accounts, self.k,
                f"{self.p_top1:.6f}", f"{self.ci95:.6f}", f"{self.epsilon:.6f}"]


def sweep(generators: Sequence[str], levels: Sequence[str], users, seed: int, k: int = 20,
          defender_model: CorpusModel | None = None, attacker_corpus: CorpusModel | None = None,
          policy: Policy = Policy(), d_min: int = 2, workers: int = 1) -> list[SweepRow]:
    """One row per (generator, level), sorted by generator then level."""
    rows = []
    for gen in sorted(set(generators)):
        cfg = GeneratorConfig(strategy=gen, k=k, d_min=d_min, seed=seed, policy=policy)
        model = defender_model if gen in ("corpus", "hybrid") else None
        accounts = generate_accounts(users, cfg, model, seed, workers)
        for level in sorted(set(Level(lv) for lv in levels), key=lambda lv: lv.value):
            attacker = AttackerModel.for_level(level, attacker_corpus)
            rep = simulate(accounts, attacker, seed, workers=workers)
            rows.append(SweepRow(gen, level.value, rep.accounts, rep.k, rep.p, rep.ci95, rep.epsilon))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def read_accounts(path) -> list[tuple[str, str, PiiRecord | None]]:
    """Read (uid, real, pii) from a plaintext accounts file (JSON lines)."""
    users = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if "real" in obj:
            real = obj["real"]
        else:
            real = obj["sweetwords"][obj["true_index"]]
        pii = PiiRecord.from_dict(obj["pii"]) if obj.get("pii") else None
        users.append((obj.get("uid", f"line{lineno}"), real, pii))
    return users
