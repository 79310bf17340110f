import numpy as np
import pytest

from gramctc import Label, build_vocab, unigram_vocab


@pytest.fixture
def ab_vocab():
    """{a, b, ab} + blank: the smallest vocab with a real bi-gram."""
    return build_vocab(["a", "b", "ab"], "ab")


@pytest.fixture
def unigram_ab():
    return unigram_vocab("ab")


@pytest.fixture
def cat_vocab():
    """All uni- and bi-grams of C, A, T."""
    units = "CAT"
    bigrams = [u + v for u in units for v in units]
    return build_vocab(list(units) + bigrams, units)


def random_instance(rng, vocab, max_t, max_len, min_t=1, min_len=0):
    """Seeded (label, logits) pair over the vocab's base units."""
    T = int(rng.integers(min_t, max_t + 1))
    length = int(rng.integers(min_len, max_len + 1))
    units = list(vocab.base_units)
    label = Label("".join(rng.choice(units, size=length)))
    logits = rng.normal(size=(T, vocab.total_symbols))
    return label, logits
