import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gramctc import (
    Label,
    brute_force_label_distribution,
    brute_force_likelihood,
    build_lattice,
    build_vocab,
    collapse,
    likelihood,
    log_softmax,
)


@pytest.fixture
def hello_vocab():
    return build_vocab(["he", "ll", "o", "h", "e", "l"], "helo")


def test_collapse_merges_repeats_then_drops_blanks(hello_vocab):
    ids = [hello_vocab.gram_id(s) for s in ("he", "he")] + [0] + [
        hello_vocab.gram_id("ll"), hello_vocab.gram_id("o")
    ]
    assert str(collapse(ids, hello_vocab)) == "hello"


def test_collapse_all_blanks(ab_vocab):
    assert str(collapse([0, 0, 0], ab_vocab)) == ""


def test_collapse_is_by_gram_identity_not_characters(ab_vocab):
    a, ab = ab_vocab.gram_id("a"), ab_vocab.gram_id("ab")
    assert str(collapse([a, ab], ab_vocab)) == "aab"


def test_collapse_blank_separated_twins(ab_vocab):
    a = ab_vocab.gram_id("a")
    assert str(collapse([a, 0, a], ab_vocab)) == "aa"
    assert str(collapse([a, a], ab_vocab)) == "a"


def test_uniform_t2_likelihood_is_three_quarters():
    v = build_vocab(["a"], "a")
    post = np.full((2, 2), 0.5)
    assert np.isclose(brute_force_likelihood(post, Label("a"), v), 0.75)


def test_too_short_t_gives_zero(ab_vocab):
    post = np.full((1, 4), 0.25)
    assert brute_force_likelihood(post, Label("aaa"), ab_vocab) == 0.0


def test_matches_dp_on_random_instance(ab_vocab):
    rng = np.random.default_rng(0)
    lp = log_softmax(rng.normal(size=(3, 4)))
    label = Label("ab")
    bf = brute_force_likelihood(np.exp(lp), label, ab_vocab)
    dp = np.exp(likelihood(build_lattice(ab_vocab, label), lp).log_likelihood)
    assert abs(bf - dp) / bf <= 1e-9


def test_distribution_t1_uniform():
    v = build_vocab(["a"], "a")
    dist = brute_force_label_distribution(np.full((1, 2), 0.5), v)
    assert dist == {"": 0.5, "a": 0.5}


def test_distribution_t2_uniform_enumerated():
    # 4 paths: (-,-) -> ""; (-,a), (a,-), (a,a) -> "a"; "aa" needs T >= 3
    v = build_vocab(["a"], "a")
    dist = brute_force_label_distribution(np.full((2, 2), 0.5), v)
    assert set(dist) == {"", "a"}
    assert np.isclose(dist[""], 0.25)
    assert np.isclose(dist["a"], 0.75)
    v_dist = brute_force_label_distribution(np.full((3, 2), 0.5), v)
    assert np.isclose(v_dist["aa"], 1 / 8)  # first T with "aa" mass


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.integers(1, 4))
def test_distribution_total_mass_is_one(seed, t):
    v = build_vocab(["a", "b", "ab"], "ab")
    rng = np.random.default_rng(seed)
    post = np.exp(log_softmax(rng.normal(size=(t, 4))))
    dist = brute_force_label_distribution(post, v)
    assert np.isclose(sum(dist.values()), 1.0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.integers(1, 5))
def test_collapse_idempotent_at_label_level(seed, t):
    # the emission sequence determines the label: re-embedding each emitted
    # gram as one frame (with a blank splitting identical neighbours, which
    # the collapse rule forces) collapses to the same label
    v = build_vocab(["a", "b", "ab"], "ab")
    rng = np.random.default_rng(seed)
    path = rng.integers(0, 4, size=t)
    label1 = collapse(path, v)
    emissions = []
    prev = None
    for gid in path:
        gid = int(gid)
        if gid != prev and gid != 0:
            emissions.append(gid)
        prev = gid
    rebuilt = []
    for n, gid in enumerate(emissions):
        if n and emissions[n - 1] == gid:
            rebuilt.append(0)
        rebuilt.append(gid)
    assert str(collapse(rebuilt, v)) == str(label1)


def test_cap_exceeded_reports_bound(ab_vocab):
    post = np.exp(log_softmax(np.zeros((12, 4))))
    with pytest.raises(ValueError, match="16777216"):
        brute_force_likelihood(post, Label("a"), ab_vocab, cap=10**6)


def test_posterior_validation(ab_vocab):
    with pytest.raises(ValueError, match="sum to 1"):
        brute_force_likelihood(np.full((2, 4), 0.3), Label("a"), ab_vocab)
    with pytest.raises(ValueError, match="T x 4"):
        brute_force_likelihood(np.full((2, 3), 1 / 3), Label("a"), ab_vocab)


def test_t0_empty_path():
    v = build_vocab(["a"], "a")
    post = np.zeros((0, 2))
    assert brute_force_likelihood(post, Label(""), v) == 1.0
    assert brute_force_likelihood(post, Label("a"), v) == 0.0
