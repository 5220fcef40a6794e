import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeyauth.errors import TrainError
from honeyauth.model import CHARSETS, CorpusModel, parse_template, segments, template, train_model


def test_hand_computed_templates():
    assert template("password") == "L8"
    assert template("ab12") == "L2D2"
    assert template("Summer2024!") == "L6D4S1"
    assert template("1q2w") == "D1L1D1L1"
    assert segments("ab12!") == [("L", "ab"), ("D", "12"), ("S", "!")]
    assert parse_template("L6D2") == [("L", 6), ("D", 2)]


def test_single_password_corpus():
    m = train_model(["aaaa"])
    assert m.templates == {"L4": 1.0}
    assert math.isclose(m.template_logprob("L4"), 0.0, abs_tol=1e-12)


def test_two_password_corpus():
    m = train_model(["ab12", "cd34"])
    assert m.templates == {"L2D2": 1.0}
    assert m.frequency == {"ab12": 1, "cd34": 1}
    assert math.isclose(m.template_logprob("L2D2"), 0.0, abs_tol=1e-12)


def test_training_is_deterministic():
    corpus = ["ab12", "cd34", "Ab!9", "ab12"]
    assert train_model(corpus).to_json() == train_model(list(corpus)).to_json()


def test_empty_corpus():
    with pytest.raises(TrainError):
        train_model([])
    with pytest.raises(TrainError):
        train_model(["", "\n"])


def test_json_round_trip(model):
    again = CorpusModel.from_json(model.to_json())
    assert again.to_json() == model.to_json()
    assert again.log_likelihood("monkey123") == model.log_likelihood("monkey123")


def test_fill_respects_template(model):
    rng = random.Random(0)
    for tpl in ["L6D2", "S1L3D4", "D6", "L1S1L1"]:
        for _ in range(20):
            assert template(model.fill(tpl, rng)) == tpl


def test_frequent_passwords_score_higher(model):
    assert model.log_likelihood("123456") > model.log_likelihood("q#8Zk!x")


@pytest.mark.parametrize("prefix", ["", "mon", "zz!9"])
def test_char_distribution_normalized_within_class(model, prefix):
    # scoring is class-restricted: the template already chose the class
    for cls, pool in CHARSETS.items():
        total = sum(math.exp(model.char_logprob(prefix, ch)) for ch in pool)
        assert total == pytest.approx(1.0, abs=1e-9), cls


@given(st.text("abcXY12!", min_size=1, max_size=12))
def test_log_likelihood_finite_and_negative(pw):
    m = train_model(["ab12", "cd34", "XY!1", "abc"])
    ll = m.log_likelihood(pw)
    assert math.isfinite(ll) and ll <= 0.0
