"""Corpus model: frequency map, structure templates and an order-n Markov chain.

Templates use three symbols: ``L`` letters (either case), ``D`` digits and
``S`` everything else, run-length encoded, so ``ab12`` is ``L2D2``.  The
Markov chain keeps transition counts for every context order from 0 to n so
both sampling and scoring can back off to shorter contexts.

Serialized form (one JSON document, keys sorted)::

    {"format": "honeyauth-corpus-model/1", "order": 3, "total": <passwords>,
     "frequency": {pw: count}, "templates": {template: probability},
     "transitions": {context: {char: count}}}

Contexts are the preceding characters, left-padded with ``\\x02``; the
empty context holds unigram counts.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ParseError, TrainError

FORMAT = "honeyauth-corpus-model/1"
BOS = "\x02"
CHARSETS = {
    "L": string.ascii_letters,
    "D": string.digits,
    "S": string.punctuation,
}
_TEMPLATE_RE = re.compile(r"([LDS])(\d+)")


def char_class(ch: str) -> str:
    if ch in string.digits:
        return "D"
    if ch.isalpha():
        return "L"
    return "S"


def segments(pw: str) -> list[tuple[str, str]]:
    """Split ``pw`` into maximal same-class runs: ``ab12`` -> [(L, ab), (D, 12)]."""
    return [(cls, "".join(run)) for cls, run in itertools.groupby(pw, key=char_class)]


def template(pw: str) -> str:
    return "".join(f"{cls}{len(text)}" for cls, text in segments(pw))


def parse_template(tpl: str) -> list[tuple[str, int]]:
    parts = [(cls, int(n)) for cls, n in _TEMPLATE_RE.findall(tpl)]
    if "".join(f"{c}{n}" for c, n in parts) != tpl or any(n < 1 for _, n in parts):
        raise ValueError(f"malformed template {tpl!r}")
    return parts


@dataclass
class CorpusModel:
    frequency: dict[str, int]
    templates: dict[str, float]
    transitions: dict[str, dict[str, int]]
    order: int = 3
    total: int = 0
    _rows: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if abs(sum(self.templates.values()) - 1.0) > 1e-9:
            raise ValueError("template probabilities must sum to 1")

    # -- lookup ---------------------------------------------------------
    def count(self, pw: str) -> int:
        return self.frequency.get(pw, 0)

    def template_logprob(self, tpl: str) -> float:
        prob = self.templates.get(tpl)
        if prob is None:
            return math.log(0.5 / (self.total + 1))
        return math.log(prob)

    def _row(self, ctx: str, cls: str):
        """Class-filtered successor counts for ``ctx`` as (chars, cumulative, total)."""
        key = (ctx, cls)
        row = self._rows.get(key)
        if row is None:
            counts = self.transitions.get(ctx, {})
            chars = sorted(c for c in counts if char_class(c) == cls)
            cum = list(itertools.accumulate(counts[c] for c in chars))
            row = (chars, cum, cum[-1] if cum else 0, {c: counts[c] for c in chars})
            self._rows[key] = row
        return row

    def _context(self, prefix: str) -> str:
        return (BOS * self.order + prefix)[-self.order:] if self.order else ""

    # -- sampling -------------------------------------------------------
    def sample_template(self, rng) -> str:
        keys = sorted(self.templates)
        return rng.choices(keys, weights=[self.templates[k] for k in keys])[0]

    def sample_password(self, rng) -> str:
        """Draw a corpus password with probability proportional to its count."""
        table = self._rows.get("__freq__")
        if table is None:
            keys = sorted(self.frequency)
            table = (keys, list(itertools.accumulate(self.frequency[k] for k in keys)))
            self._rows["__freq__"] = table
        keys, cum = table
        return keys[bisect.bisect_right(cum, rng.random() * cum[-1])]

    def sample_char(self, prefix: str, cls: str, rng) -> str:
        ctx = self._context(prefix)
        for j in range(len(ctx), -1, -1):
            chars, cum, total, _ = self._row(ctx[len(ctx) - j:], cls)
            if total:
                return chars[bisect.bisect_right(cum, rng.random() * total)]
        return rng.choice(CHARSETS[cls])

    def fill(self, tpl: str, rng, prefix: str = "") -> str:
        """Markov walk constrained to the character classes of ``tpl``."""
        out = prefix
        for cls, n in parse_template(tpl):
            for _ in range(n):
                out += self.sample_char(out, cls, rng)
        return out[len(prefix):]

    # -- scoring --------------------------------------------------------
    def char_logprob(self, prefix: str, ch: str) -> float:
        cls = char_class(ch)
        ctx = self._context(prefix)
        prob = 1.0 / len(CHARSETS[cls])
        for j in range(0, len(ctx) + 1):
            _, _, total, counts = self._row(ctx[len(ctx) - j:], cls)
            prob = (counts.get(ch, 0) + prob) / (total + 1)
        return math.log(prob)

    def markov_logprob(self, pw: str) -> float:
        return sum(self.char_logprob(pw[:i], ch) for i, ch in enumerate(pw))

    def log_likelihood(self, pw: str) -> float:
        """Template log-probability plus class-conditional Markov log-probability."""
        return self.template_logprob(template(pw)) + self.markov_logprob(pw)

    # -- serialization --------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "format": FORMAT,
            "order": self.order,
            "total": self.total,
            "frequency": self.frequency,
            "templates": self.templates,
            "transitions": self.transitions,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CorpusModel":
        try:
            doc = json.loads(text)
            if doc.get("format") != FORMAT:
                raise ValueError(f"unsupported model format {doc.get('format')!r}")
            return cls(
                frequency={k: int(v) for k, v in doc["frequency"].items()},
                templates={k: float(v) for k, v in doc["templates"].items()},
                transitions={c: {k: int(v) for k, v in row.items()}
                             for c, row in doc["transitions"].items()},
                order=int(doc["order"]),
                total=int(doc["total"]),
            )
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"bad corpus model: {exc}") from None


def train_model(corpus, order: int = 3) -> CorpusModel:
    """Count passwords, templates and order-0..n transitions from ``corpus``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    frequency = Counter()
    for pw in corpus:
        pw = pw.rstrip("\r\n")
        if pw:
            frequency[pw] += 1
    if not frequency:
        raise TrainError("empty corpus")

    total = sum(frequency.values())
    tpl_counts = Counter()
    transitions: dict[str, Counter] = {}
    for pw in sorted(frequency):
        n = frequency[pw]
        tpl_counts[template(pw)] += n
        padded = BOS * order + pw
        for i, ch in enumerate(pw):
            ctx = padded[i:i + order]
            for j in range(order + 1):
                transitions.setdefault(ctx[order - j:], Counter())[ch] += n

    # normalize in sorted order so float sums are reproducible
    templates = {t: tpl_counts[t] / total for t in sorted(tpl_counts)}
    return CorpusModel(
        frequency={pw: frequency[pw] for pw in sorted(frequency)},
        templates=templates,
        transitions={c: {ch: row[ch] for ch in sorted(row)} for c, row in sorted(transitions.items())},
        order=order,
        total=total,
    )


def read_corpus(path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line]


def toy_corpus() -> list[str]:
    """The bundled 5,000-line synthetic corpus."""
    text = resources.files("honeyauth").joinpath("data/toy_corpus.txt").read_text("utf-8")
    return [line for line in text.splitlines() if line]
