"""Entropy and brute-force crack-time arithmetic.

Keyspaces are exact integers N**L.  Years are Julian years of 31,557,600 s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .credstore import DEFAULT_PROFILES, TABLE_PROFILES, KdfProfile
from .errors import ConfigError

SECONDS_PER_YEAR = 31_557_600
SECONDS_PER_DAY = 86_400
DEFAULT_BUDGET = 5 * 10**9


@dataclass(frozen=True)
class Duration:
    seconds: float

    @property
    def days(self):
        return self.seconds / SECONDS_PER_DAY

    @property
    def years(self):
        return self.seconds / SECONDS_PER_YEAR

    def human(self) -> str:
        s = self.seconds
        if s >= 100 * SECONDS_PER_YEAR:
            return f"{self.years:,.0f} yrs"
        if s >= 10 * SECONDS_PER_YEAR:
            return f"{self.years:.1f} yrs"
        if s >= SECONDS_PER_YEAR:
            return f"{self.years:.2f} yrs"
        if s >= 3600:
            return f"{self.days:,.2f} d"
        return f"{s:,.3g} s"

    def __str__(self):
        return self.human()


def _check_space(length, alphabet):
    if not isinstance(length, int) or length < 1:
        raise ConfigError(f"length must be an integer >= 1, got {length!r}")
    if not isinstance(alphabet, int) or alphabet < 2:
        raise ConfigError(f"alphabet must be an integer >= 2, got {alphabet!r}")


def _check_rate(rate):
    if not rate > 0:
        raise ConfigError(f"rate must be > 0, got {rate!r}")


def entropy_bits(length: int, alphabet: int) -> float:
    _check_space(length, alphabet)
    return length * math.log2(alphabet)


def keyspace(length: int, alphabet: int) -> int:
    _check_space(length, alphabet)
    return alphabet**length


def budget_time(budget, rate) -> Duration:
    _check_rate(rate)
    if budget < 0:
        raise ConfigError("budget must be >= 0")
    # Fraction keeps huge integer budgets exact until the final division
    return Duration(float(Fraction(budget) / Fraction(rate)))


def exhaustive_time(length: int, alphabet: int, rate) -> Duration:
    return budget_time(keyspace(length, alphabet), rate)


def _rate_text(rate):
    return f"~{rate:,.0f}/s"


def render_tables(profiles=None, length=8, alphabet=62, budget=DEFAULT_BUDGET) -> str:
    """Exhaustive and reduced-budget crack-time tables, one row per profile."""
    if profiles is None:
        profiles = [DEFAULT_PROFILES[p] for p in TABLE_PROFILES]
    profiles: list[KdfProfile] = list(profiles)
    h = entropy_bits(length, alphabet)
    name_w = max([len(p.describe()) for p in profiles] + [9])

    lines = [f"Exhaustive crack times: L={length}, N={alphabet}, H={h:.2f} bits, "
             f"keyspace={keyspace(length, alphabet):.4e}"]
    lines.append(f"{'Algorithm':<{name_w}}  {'Hash Rate':>14}  {'Exhaustive Time':>18}")
    for p in profiles:
        t = exhaustive_time(length, alphabet, p.bench_rate)
        lines.append(f"{p.describe():<{name_w}}  {_rate_text(p.bench_rate):>14}  {t.human():>18}")
    lines.append("")
    lines.append(f"Budget crack times: {budget:.3g} guesses")
    lines.append(f"{'Algorithm':<{name_w}}  {'Mem. Cost':>10}  {'Hash Rate':>14}  {'Rel. Time':>12}")
    for p in profiles:
        t = budget_time(budget, p.bench_rate)
        mem = f"{p.memory_cost / 2**20:g}MB" if p.memory_cost >= 2**20 else f"{p.memory_cost / 1024:g}KB"
        lines.append(f"{p.describe():<{name_w}}  {mem:>10}  {_rate_text(p.bench_rate):>14}  {t.human():>12}")
    return "\n".join(lines) + "\n"
