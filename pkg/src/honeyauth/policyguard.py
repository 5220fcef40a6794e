"""pwquality-style password policy: strict parser and set-level checks.

Unknown keys are an error rather than being skipped, so a config with an
invented parameter fails loudly instead of silently weakening enforcement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError, ParseError

INT_KEYS = ("minlen", "minclass", "maxrepeat", "dictcheck", "dcredit", "ucredit", "lcredit", "ocredit")
KEYS = INT_KEYS + ("dictpath",)


class Violation(str, enum.Enum):
    MINLEN = "MINLEN"
    MINCLASS = "MINCLASS"
    MAXREPEAT = "MAXREPEAT"
    DICT = "DICT"
    CLASSMIN = "CLASSMIN"


class SetStatus(str, enum.Enum):
    OK = "OK"
    DISTINGUISHABLE = "DISTINGUISHABLE"
    ALL_REJECTED = "ALL_REJECTED"


@dataclass(frozen=True)
class Policy:
    """Credits are absolute minimum counts per class (negative pwquality
    credits are read as their magnitude)."""

    minlen: int = 8
    minclass: int = 1
    maxrepeat: int = 4
    dictcheck: bool = False
    dictpath: str | None = None
    dcredit: int = 0
    ucredit: int = 0
    lcredit: int = 0
    ocredit: int = 0
    wordlist: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        if self.minlen < 1:
            raise ConfigError("minlen must be >= 1")
        if not 0 <= self.minclass <= 4:
            raise ConfigError("minclass must be in [0, 4]")
        if self.maxrepeat < 1:
            raise ConfigError("maxrepeat must be >= 1")
        for key in ("dcredit", "ucredit", "lcredit", "ocredit"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be >= 0")

    def with_wordlist(self, words) -> "Policy":
        return replace(self, wordlist=frozenset(w.strip().lower() for w in words if w.strip()))


def default_wordlist():
    text = resources.files("honeyauth").joinpath("data/common_passwords.txt").read_text("utf-8")
    return [w for w in text.splitlines() if w]


def parse_policy(config_text: str) -> Policy:
    values = {}
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        if key not in KEYS:
            raise ConfigError(key)
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key == "dictpath":
            values[key] = value
            continue
        try:
            number = int(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} needs an integer, got {value!r}") from None
        if key == "dictcheck":
            if number not in (0, 1):
                raise ConfigError(f"line {lineno}: dictcheck must be 0 or 1")
            values[key] = bool(number)
        elif key.endswith("credit"):
            values[key] = abs(number)
        else:
            values[key] = number
    return Policy(**values)


def load_policy(path) -> Policy:
    """Parse a policy file and attach its dictionary wordlist."""
    path = Path(path)
    policy = parse_policy(path.read_text(encoding="utf-8"))
    return attach_wordlist(policy, base_dir=path.parent)


def attach_wordlist(policy: Policy, base_dir=None) -> Policy:
    if not policy.dictcheck:
        return policy
    if policy.dictpath is None:
        return policy.with_wordlist(default_wordlist())
    wordfile = Path(policy.dictpath)
    if base_dir is not None and not wordfile.is_absolute():
        wordfile = Path(base_dir) / wordfile
    try:
        return policy.with_wordlist(wordfile.read_text(encoding="utf-8").splitlines())
    except OSError as exc:
        raise ConfigError(f"cannot read dictpath {policy.dictpath!r}: {exc}") from None


def render_policy(policy: Policy) -> str:
    lines = []
    for key in INT_KEYS:
        value = getattr(policy, key)
        lines.append(f"{key}={int(value)}")
    if policy.dictpath is not None:
        lines.append(f"dictpath={policy.dictpath}")
    return "\n".join(lines) + "\n"


def class_counts(pw: str) -> dict[str, int]:
    counts = {"digit": 0, "upper": 0, "lower": 0, "other": 0}
    for ch in pw:
        if ch.isdigit():
            counts["digit"] += 1
        elif ch.isupper():
            counts["upper"] += 1
        elif ch.islower():
            counts["lower"] += 1
        else:
            counts["other"] += 1
    return counts


def longest_run(pw: str) -> int:
    best = run = 0
    prev = None
    for ch in pw:
        run = run + 1 if ch == prev else 1
        best = max(best, run)
        prev = ch
    return best


def check_password(policy: Policy, pw: str) -> list[Violation]:
    """Return the violated rules; an empty list means the password passes."""
    out = []
    counts = class_counts(pw)
    if len(pw) < policy.minlen:
        out.append(Violation.MINLEN)
    if sum(1 for n in counts.values() if n) < policy.minclass:
        out.append(Violation.MINCLASS)
    if longest_run(pw) > policy.maxrepeat:
        out.append(Violation.MAXREPEAT)
    if policy.dictcheck and pw.lower() in policy.wordlist:
        out.append(Violation.DICT)
    if (counts["digit"] < policy.dcredit or counts["upper"] < policy.ucredit
            or counts["lower"] < policy.lcredit or counts["other"] < policy.ocredit):
        out.append(Violation.CLASSMIN)
    return out


def passes(policy: Policy, pw: str) -> bool:
    return not check_password(policy, pw)


@dataclass
class SetReport:
    status: SetStatus
    verdicts: list[list[Violation]]

    @property
    def offending(self) -> list[int]:
        return [i for i, v in enumerate(self.verdicts) if v]

    def to_dict(self):
        return {
            "status": self.status.value,
            "offending": self.offending,
            "violations": {str(i): [v.value for v in self.verdicts[i]] for i in self.offending},
        }


def check_sweetword_set(policy: Policy, sweetwords) -> SetReport:
    """Check every member.  Mixed verdicts mean the failing members can be
    told apart from the rest, which is reported as DISTINGUISHABLE."""
    sweetwords = list(sweetwords)
    if not sweetwords:
        raise ParseError("empty sweetword list")
    verdicts = [check_password(policy, sw) for sw in sweetwords]
    failing = sum(1 for v in verdicts if v)
    if failing == 0:
        status = SetStatus.OK
    elif failing == len(verdicts):
        status = SetStatus.ALL_REJECTED
    else:
        status = SetStatus.DISTINGUISHABLE
    return SetReport(status, verdicts)
