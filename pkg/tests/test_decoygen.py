import random
from collections import Counter

import pytest

from honeyauth.decoygen import (
    GeneratorConfig,
    PiiRecord,
    assemble_sweetwords,
    derive_seed,
    generate,
    keyboard_adjacency,
    personalize,
)
from honeyauth.errors import ConfigError, GenerationError
from honeyauth.model import template, train_model
from honeyauth.policyguard import Policy, passes

from .oracles.levenshtein import lev


def test_random_matches_charset_and_length():
    real = "Summer2024!"
    decoys = generate(real, GeneratorConfig("random", k=4, seed=1))
    assert len(decoys) == 3 and real not in decoys
    for d in decoys:
        assert len(d) == len(real)
        assert passes(Policy(), d)
        assert lev(d, real) >= 2


def test_typo_distance_in_range():
    real = "password1"
    for seed in range(5):
        decoys = generate(real, GeneratorConfig("typo", k=6, d_min=1, seed=seed))
        assert len(set(decoys)) == 5
        for d in decoys:
            assert 1 <= lev(d, real) <= 2


def test_typo_rejects_d_min_above_two():
    with pytest.raises(ConfigError):
        GeneratorConfig("typo", d_min=3)


@pytest.mark.parametrize("layout", ["qwerty", "azerty", "qwertz"])
def test_keyboard_adjacency_is_symmetric(layout):
    adj = keyboard_adjacency(layout)
    for key, neighbours in adj.items():
        for n in neighbours:
            assert key in adj[n]


def test_layouts_differ():
    assert keyboard_adjacency("qwerty")["q"] != keyboard_adjacency("azerty")["q"]


def test_hybrid_keeps_single_template():
    rng = random.Random(0)
    corpus = ["".join(rng.choice("abcdefghij") for _ in range(6)) + f"{rng.randint(0, 99):02d}"
              for _ in range(300)]
    m = train_model(corpus)
    decoys = generate("qwerty12", GeneratorConfig("hybrid", k=10, seed=3), model=m)
    assert len(decoys) == 9
    assert {template(d) for d in decoys} == {"L6D2"}


def test_corpus_decoys_come_from_corpus(model):
    decoys = generate("zebra!!42x", GeneratorConfig("corpus", k=20, seed=2), model=model)
    assert all(model.count(d) > 0 for d in decoys)
    assert all(passes(Policy(), d) and lev(d, "zebra!!42x") >= 2 for d in decoys)


@pytest.mark.parametrize("strategy", ["random", "corpus", "hybrid"])
def test_generation_is_deterministic(strategy, model):
    cfg = GeneratorConfig(strategy, k=20, seed=11)
    a = generate("monkey123", cfg, model=model)
    b = generate("monkey123", cfg, model=model)
    assert a == b
    assert len(set(a)) == 19 and "monkey123" not in a


def test_needs_model_for_corpus_strategies():
    with pytest.raises(ConfigError):
        generate("monkey123", GeneratorConfig("hybrid"))


def test_unsatisfiable_policy_names_constraint():
    # lowercase+digit real, random decoys drawn from the same classes,
    # policy demands three classes: every candidate fails MINCLASS
    cfg = GeneratorConfig("random", k=4, policy=Policy(minclass=3), max_attempts=500)
    with pytest.raises(GenerationError) as exc:
        generate("password1", cfg)
    assert "MINCLASS" in exc.value.constraint
    assert "MINCLASS" in str(exc.value)


def test_default_retry_bound():
    assert GeneratorConfig().max_attempts == 10_000


def test_personalize_replaces_segments():
    pii = PiiRecord(username="mgarcia", birth_year=1987, names=("Maria", "Garcia"))
    rng = random.Random(0)
    out = personalize("Sunny12", pii, rng, letter_rate=1.0, digit_rate=1.0)
    assert out in {"Maria87", "Garcia87", "Mgarcia87"}
    assert personalize("sunny123", pii, rng, letter_rate=0.0, digit_rate=1.0) == "sunny123"
    assert personalize("sunny2001", pii, rng, letter_rate=0.0, digit_rate=1.0) == "sunny1987"


def test_pii_round_trip():
    pii = PiiRecord(username="Bob_9", birth_year=1990, names=("Bob", "Lee"), keyboard_layout="azerty")
    assert PiiRecord.from_dict(pii.to_dict()) == pii
    assert pii.tokens() == ["bob", "lee", "1990", "90"]


def test_assemble_contains_real_once():
    decoys = [f"decoy{i:03d}x" for i in range(19)]
    sw, idx = assemble_sweetwords("realpass1", decoys, seed=5)
    assert len(sw) == 20 and sw.count("realpass1") == 1 and sw[idx] == "realpass1"
    assert sorted(x for x in sw if x != "realpass1") == sorted(decoys)


def test_assemble_same_seed_same_permutation():
    decoys = [f"decoy{i:03d}x" for i in range(19)]
    assert assemble_sweetwords("r", decoys, 9) == assemble_sweetwords("r", decoys, 9)
    assert assemble_sweetwords("r", decoys, 9) != assemble_sweetwords("r", decoys, 10)


def test_assemble_rejects_duplicates():
    with pytest.raises(GenerationError):
        assemble_sweetwords("a1", ["b2", "b2"], 0)
    with pytest.raises(GenerationError):
        assemble_sweetwords("a1", ["a1", "b2"], 0)


def test_real_index_is_uniform():
    decoys = [f"decoy{i:03d}x" for i in range(19)]
    n = 10_000
    counts = Counter(assemble_sweetwords("realpass1", decoys, derive_seed(42, i))[1] for i in range(n))
    assert set(counts) == set(range(20))
    for idx in range(20):
        assert abs(counts[idx] / n - 0.05) <= 0.01, idx
    # chi-square with 19 dof; 43.8 is the 0.999 quantile
    chi2 = sum((c - n / 20) ** 2 / (n / 20) for c in counts.values())
    assert chi2 < 43.8
