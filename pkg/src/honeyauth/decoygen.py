"""Decoy generation (typo, random, corpus, hybrid) and sweetword assembly."""

from __future__ import annotations

import hashlib
import json
import math
import random
import string
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import ConfigError, GenerationError
from .model import CorpusModel, segments
from .policyguard import Policy, check_password

STRATEGIES = ("typo", "random", "corpus", "hybrid")
TYPO_MAX_DISTANCE = 2


def derive_seed(master, *parts) -> int:
    """64-bit seed for an independent stream keyed by ``parts``."""
    h = hashlib.blake2b(digest_size=8, person=b"honeyauth-rng")
    h.update(str(master).encode())
    for part in parts:
        h.update(b"\x1f" + str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class PiiRecord:
    """Synthetic personal data for one account."""

    username: str = ""
    birth_year: int | None = None
    names: tuple[str, ...] = ()
    keyboard_layout: str = "qwerty"

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(n.lower() for n in self.names if n))
        object.__setattr__(self, "username", self.username.lower())

    def letter_tokens(self) -> list[str]:
        toks = list(self.names)
        handle = "".join(ch for ch in self.username if ch.isalpha())
        if handle and handle not in toks:
            toks.append(handle)
        return toks

    def digit_tokens(self) -> list[str]:
        if self.birth_year is None:
            return []
        year = f"{self.birth_year:04d}"
        return [year, year[2:]]

    def tokens(self) -> list[str]:
        return self.letter_tokens() + self.digit_tokens()

    def to_dict(self):
        return {
            "username": self.username,
            "birth_year": self.birth_year,
            "names": list(self.names),
            "keyboard_layout": self.keyboard_layout,
        }

    @classmethod
    def from_dict(cls, d) -> "PiiRecord":
        return cls(
            username=d.get("username", ""),
            birth_year=d.get("birth_year"),
            names=tuple(d.get("names", ())),
            keyboard_layout=d.get("keyboard_layout", "qwerty"),
        )


@dataclass(frozen=True)
class GeneratorConfig:
    strategy: str = "hybrid"
    k: int = 20
    d_min: int = 2
    seed: int = 0
    policy: Policy = field(default_factory=Policy)
    max_attempts: int = 10_000
    pii_letter_rate: float = 0.3
    pii_digit_rate: float = 0.3
    candidate_pool: int = 4

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.k < 2:
            raise ConfigError("k must be >= 2")
        if self.d_min < 1:
            raise ConfigError("d_min must be >= 1")
        if self.strategy == "typo" and self.d_min > TYPO_MAX_DISTANCE:
            raise ConfigError(f"typo strategy needs d_min <= {TYPO_MAX_DISTANCE}")


@lru_cache(maxsize=None)
def keyboard_adjacency(layout: str = "qwerty") -> dict[str, str]:
    """Neighbouring keys on a staggered keyboard, from the bundled row data."""
    rows = json.loads(resources.files("honeyauth").joinpath("data/keyboards.json").read_text("utf-8"))
    if layout not in rows:
        raise ConfigError(f"unknown keyboard layout {layout!r}")
    grid = rows[layout]
    adj = {}
    for r, row in enumerate(grid):
        for c, key in enumerate(row):
            near = []
            for rr, cc in ((r, c - 1), (r, c + 1), (r - 1, c), (r - 1, c + 1), (r + 1, c - 1), (r + 1, c)):
                if 0 <= rr < len(grid) and 0 <= cc < len(grid[rr]):
                    near.append(grid[rr][cc])
            adj[key] = "".join(near)
    return adj


# -- typo edits -------------------------------------------------------------

def _adjacent_key(pw, rng, adj):
    spots = [i for i, ch in enumerate(pw) if ch.lower() in adj]
    if not spots:
        return pw
    i = rng.choice(spots)
    repl = rng.choice(adj[pw[i].lower()])
    if pw[i].isupper():
        repl = repl.upper()
    return pw[:i] + repl + pw[i + 1:]


def _toggle_case(pw, rng, adj):
    spots = [i for i, ch in enumerate(pw) if ch.isalpha() and ch.swapcase() != ch]
    if not spots:
        return pw
    i = rng.choice(spots)
    return pw[:i] + pw[i].swapcase() + pw[i + 1:]


def _bump_trailing_digits(pw, rng, adj):
    head = pw.rstrip(string.digits)
    tail = pw[len(head):]
    if not tail:
        return pw
    value = int(tail) + rng.choice((-1, 1))
    if value < 0:
        value = 1
    return head + str(value).zfill(len(tail))


def _transpose(pw, rng, adj):
    spots = [i for i in range(len(pw) - 1) if pw[i] != pw[i + 1]]
    if not spots:
        return pw
    i = rng.choice(spots)
    return pw[:i] + pw[i + 1] + pw[i] + pw[i + 2:]


TYPO_EDITS = (_adjacent_key, _toggle_case, _bump_trailing_digits, _transpose)


def _typo_candidate(real, rng, adj):
    pw = real
    for _ in range(rng.choice((1, 2))):
        pw = rng.choice(TYPO_EDITS)(pw, rng, adj)
    return pw


def _random_candidate(real, rng, policy):
    counts = {"digit": 0, "upper": 0, "lower": 0, "other": 0}
    for ch in real:
        if ch.isdigit():
            counts["digit"] += 1
        elif ch.isupper():
            counts["upper"] += 1
        elif ch.islower():
            counts["lower"] += 1
        else:
            counts["other"] += 1
    pools = {
        "digit": string.digits,
        "upper": string.ascii_uppercase,
        "lower": string.ascii_lowercase,
        "other": string.punctuation,
    }
    charset = "".join(pools[c] for c in pools if counts[c]) or string.ascii_lowercase
    length = max(len(real), policy.minlen)
    return "".join(rng.choice(charset) for _ in range(length))


def personalize(pw: str, pii: PiiRecord, rng, letter_rate=0.3, digit_rate=0.3) -> str:
    """Swap letter segments for PII name tokens and 2/4-digit segments for the
    birth year, each with the given probability."""
    letters = pii.letter_tokens()
    digits = {len(t): t for t in pii.digit_tokens()}
    out = []
    for cls, text in segments(pw):
        if cls == "L" and letters and rng.random() < letter_rate:
            tok = rng.choice(letters)
            text = tok.capitalize() if text[0].isupper() else tok
        elif cls == "D" and len(text) in digits and rng.random() < digit_rate:
            text = digits[len(text)]
        out.append(text)
    return "".join(out)


def _hybrid_candidate(rng, model, pii, cfg):
    pw = model.fill(model.sample_template(rng), rng)
    if pii is not None:
        pw = personalize(pw, pii, rng, cfg.pii_letter_rate, cfg.pii_digit_rate)
    return pw


class _Collector:
    """Accepts candidates that satisfy every decoy constraint, counting rejects."""

    def __init__(self, real, cfg, typo=False):
        self.real = real
        self.cfg = cfg
        self.typo = typo
        self.seen = {real}
        self.accepted = []
        self.rejects = Counter()
        self.attempts = 0

    def offer(self, cand) -> bool:
        self.attempts += 1
        reason = self._reject_reason(cand)
        if reason:
            self.rejects[reason] += 1
            return False
        self.seen.add(cand)
        self.accepted.append(cand)
        return True

    def _reject_reason(self, cand):
        if cand == self.real:
            return "distinct from real"
        if cand in self.seen:
            return "distinct decoys"
        d = levenshtein(cand, self.real)
        if d < self.cfg.d_min:
            return f"edit distance >= d_min ({self.cfg.d_min})"
        if self.typo and d > TYPO_MAX_DISTANCE:
            return f"typo edit distance <= {TYPO_MAX_DISTANCE}"
        violations = check_password(self.cfg.policy, cand)
        if violations:
            return "policy " + "/".join(v.value for v in violations)
        return None

    def exhausted(self):
        return self.attempts >= self.cfg.max_attempts

    def fail(self, wanted):
        worst = self.rejects.most_common(1)
        constraint = worst[0][0] if worst else "candidate supply"
        raise GenerationError(
            f"{self.cfg.strategy}: only {len(self.accepted)} of {wanted} decoys after "
            f"{self.attempts} attempts; most violated constraint: {constraint}",
            constraint=constraint,
        )


def generate(real: str, cfg: GeneratorConfig, model: CorpusModel | None = None,
             pii: PiiRecord | None = None, seed=None) -> list[str]:
    """Return k-1 distinct policy-compliant decoys for ``real``.

    The result depends only on the arguments; ``seed`` overrides ``cfg.seed``.
    """
    if cfg.strategy in ("corpus", "hybrid") and model is None:
        raise ConfigError(f"strategy {cfg.strategy!r} needs a corpus model")
    rng = random.Random(derive_seed(cfg.seed if seed is None else seed, "generate", real))
    wanted = cfg.k - 1
    col = _Collector(real, cfg, typo=cfg.strategy == "typo")

    if cfg.strategy == "typo":
        adj = keyboard_adjacency(pii.keyboard_layout if pii else "qwerty")
        propose = lambda: _typo_candidate(real, rng, adj)  # noqa: E731
    elif cfg.strategy == "random":
        propose = lambda: _random_candidate(real, rng, cfg.policy)  # noqa: E731
    elif cfg.strategy == "corpus":
        propose = lambda: model.sample_password(rng)  # noqa: E731
    else:
        propose = lambda: _hybrid_candidate(rng, model, pii, cfg)  # noqa: E731

    target = wanted * cfg.candidate_pool if cfg.strategy == "hybrid" else wanted
    while len(col.accepted) < target and not col.exhausted():
        col.offer(propose())
    if len(col.accepted) < wanted:
        col.fail(wanted)
    if cfg.strategy != "hybrid":
        return col.accepted

    # Re-rank the pool by corpus frequency: Gumbel-top-k on log(count + 1)
    # samples k-1 candidates without replacement in proportion to count + 1.
    keyed = []
    for cand in col.accepted:
        u = rng.random()
        gumbel = -math.log(-math.log(u)) if 0.0 < u < 1.0 else 0.0
        keyed.append((math.log(model.count(cand) + 1) + gumbel, cand))
    keyed.sort(key=lambda kc: (-kc[0], kc[1]))
    return [cand for _, cand in keyed[:wanted]]


def assemble_sweetwords(real: str, decoys, seed) -> tuple[list[str], int]:
    """Shuffle ``decoys`` and insert ``real`` at a seeded uniform position."""
    decoys = list(decoys)
    if real in decoys or len(set(decoys)) != len(decoys):
        raise GenerationError("duplicate sweetwords", constraint="distinct")
    rng = random.Random(derive_seed(seed, "assemble"))
    rng.shuffle(decoys)
    index = rng.randrange(len(decoys) + 1)
    decoys.insert(index, real)
    return decoys, index
