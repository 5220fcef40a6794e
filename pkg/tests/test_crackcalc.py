import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeyauth.crackcalc import (
    SECONDS_PER_YEAR,
    Duration,
    budget_time,
    entropy_bits,
    exhaustive_time,
    keyspace,
    render_tables,
)
from honeyauth.errors import ConfigError

# Independent exact evaluation: 62**8 / rate / 31,557,600 with Fractions.
KEYSPACE_8_62 = 218_340_105_584_896


def years(guesses, rate):
    return float(Fraction(guesses) / Fraction(rate) / SECONDS_PER_YEAR)


def test_entropy_values():
    assert entropy_bits(8, 62) == pytest.approx(47.63, abs=0.005)
    assert entropy_bits(1, 2) == 1.0
    assert entropy_bits(10, 95) == pytest.approx(65.70, abs=0.005)


def test_keyspace_exact():
    assert keyspace(8, 62) == KEYSPACE_8_62


@pytest.mark.parametrize("rate,expected_years", [
    (60, 115_313.007),
    (200_000, 34.5939),
    (4_500, 1_537.507),
])
def test_exhaustive_time(rate, expected_years):
    assert exhaustive_time(8, 62, rate).years == pytest.approx(expected_years, rel=1e-5)
    assert exhaustive_time(8, 62, rate).years == pytest.approx(years(KEYSPACE_8_62, rate), rel=1e-12)


def test_rate_equal_to_keyspace_is_one_second():
    assert exhaustive_time(8, 62, 62**8).seconds == 1.0


def test_budget_time():
    assert budget_time(5e9, 60).years == pytest.approx(2.64067, rel=1e-5)
    assert budget_time(5e9, 200_000).days == pytest.approx(0.289352, rel=1e-5)
    assert budget_time(5e9, 4_500).days == pytest.approx(12.8601, rel=1e-5)
    assert budget_time(0, 60).seconds == 0


@pytest.mark.parametrize("call", [
    lambda: budget_time(1, 0),
    lambda: budget_time(1, -5),
    lambda: exhaustive_time(8, 62, 0),
    lambda: entropy_bits(0, 62),
    lambda: entropy_bits(8, 1),
    lambda: budget_time(-1, 5),
])
def test_domain_errors(call):
    with pytest.raises(ConfigError):
        call()


@given(st.integers(1, 12), st.integers(2, 120), st.integers(1, 10**12))
def test_exhaustive_equals_budget_of_keyspace(length, alphabet, rate):
    assert exhaustive_time(length, alphabet, rate) == budget_time(alphabet**length, rate)


@given(st.integers(0, 10**15), st.integers(0, 10**15), st.integers(1, 10**9))
def test_budget_time_is_additive(a, b, rate):
    lhs = budget_time(a + b, rate).seconds
    rhs = budget_time(a, rate).seconds + budget_time(b, rate).seconds
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@given(st.integers(1, 30), st.integers(2, 200))
def test_entropy_matches_keyspace(length, alphabet):
    assert entropy_bits(length, alphabet) == pytest.approx(math.log2(keyspace(length, alphabet)))


def test_human_formatting():
    assert Duration(years(KEYSPACE_8_62, 200_000) * SECONDS_PER_YEAR).human() == "34.6 yrs"
    assert budget_time(5e9, 60).human() == "2.64 yrs"
    assert budget_time(5e9, 200_000).human() == "0.29 d"
    assert exhaustive_time(8, 62, 60).human() == "115,313 yrs"


def test_default_tables_have_three_rows():
    text = render_tables()
    exhaustive, budget = text.split("\n\n")
    rows = exhaustive.splitlines()[2:]
    assert len(rows) == 3
    assert rows[0].startswith("Argon2id") and rows[1].startswith("bcrypt") and rows[2].startswith("scrypt")
    assert "115,313 yrs" in rows[0]
    assert "12.86 d" in budget.splitlines()[4]
