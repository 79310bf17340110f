import re
import time
from collections import Counter

import numpy as np
import pytest

from gramctc import (
    GramStats,
    build_vocab,
    count_corpus_grams,
    filter_grams,
    refine_pipeline,
    usage_from_decodes,
)
from gramctc.gramselect import CORPUS_FREQUENCY, read_stats, write_stats


def naive_recount(lines, max_len, base_units):
    """Regex-lookahead recount: a different mechanism than the library's."""
    base = set(base_units)
    words = []
    for line in lines:
        for word in line.split():
            for seg in re.split("[^" + re.escape("".join(base)) + "]+", word):
                if seg:
                    words.append(seg)
    counts = Counter()
    seen = {
        seg[i : i + n]
        for seg in words
        for n in range(1, max_len + 1)
        for i in range(len(seg) - n + 1)
    }
    for g in seen:
        pat = re.compile("(?=" + re.escape(g) + ")")
        counts[g] = sum(len(pat.findall(seg)) for seg in words)
    return dict(counts)


def test_count_small_fixture():
    stats = count_corpus_grams(["aa ab"], max_len=2, base_units="ab")
    assert stats.counts == {"a": 3, "b": 1, "aa": 1, "ab": 1}
    assert stats.skipped_units == 0
    assert stats.source == CORPUS_FREQUENCY


def test_count_empty_corpus():
    assert count_corpus_grams([], max_len=3, base_units="ab").counts == {}


def test_count_does_not_cross_word_boundary():
    stats = count_corpus_grams(["ab ba"], max_len=2, base_units="ab")
    # "b a" straddles the space: no "ba" from the first pair
    assert stats.counts["ab"] == 1
    assert stats.counts["ba"] == 1


def test_count_foreign_units_break_words():
    stats = count_corpus_grams(["a#b"], max_len=2, base_units="ab")
    assert stats.counts == {"a": 1, "b": 1}
    assert stats.skipped_units == 1


def test_count_matches_independent_recount():
    rng = np.random.default_rng(11)
    units = "abcde"
    lines = []
    for _ in range(100):
        words = [
            "".join(rng.choice(list(units + "#"), size=rng.integers(1, 9)))
            for _ in range(10)
        ]
        lines.append(" ".join(words))
    stats = count_corpus_grams(lines, max_len=3, base_units=units)
    assert stats.counts == naive_recount(lines, 3, units)


def test_count_rejects_bad_max_len():
    with pytest.raises(ValueError, match="max_len"):
        count_corpus_grams(["a"], max_len=0, base_units="a")


def test_count_timing_budget():
    rng = np.random.default_rng(7)
    lines = [
        "".join(rng.choice(list("abcdef "), size=200)) for _ in range(1000)
    ]
    started = time.perf_counter()
    count_corpus_grams(lines, max_len=5, base_units="abcdef")
    assert time.perf_counter() - started < 5.0


def test_filter_min_count():
    stats = GramStats({"a": 5, "ab": 3, "ba": 1}, CORPUS_FREQUENCY)
    assert filter_grams(stats, "ab", min_count=2) == ["a", "b", "ab"]


def test_filter_infinite_min_count_floors_at_base_units():
    stats = GramStats({"a": 5, "ab": 999}, CORPUS_FREQUENCY)
    assert filter_grams(stats, "ab", min_count=float("inf")) == ["a", "b"]


def test_filter_top_k_tie_breaks_lexicographically():
    stats = GramStats({"ab": 4, "ba": 4, "aa": 7}, CORPUS_FREQUENCY)
    out = filter_grams(stats, "ab", top_k_per_length={2: 2})
    assert out == ["a", "b", "aa", "ab"]  # "ab" beats "ba" at the cutoff


def test_filter_top_k_per_length_independent():
    stats = GramStats({"a": 9, "b": 1, "ab": 5, "ba": 4, "aab": 2}, CORPUS_FREQUENCY)
    out = filter_grams(stats, "ab", top_k_per_length={2: 1, 3: 0})
    assert out == ["a", "b", "ab"]


def test_filter_output_order():
    stats = GramStats({"ba": 6, "ab": 6, "aa": 2, "aab": 5}, CORPUS_FREQUENCY)
    out = filter_grams(stats, "ab", min_count=1)
    assert out == ["a", "b", "ab", "ba", "aa", "aab"]


def test_usage_from_fixture_dump():
    v = build_vocab(["t", "h", "e", "th"], "the")
    stats = usage_from_decodes(["_|th|th|e"], v)
    assert stats.counts == {"th": 1, "e": 1}
    assert stats.source == "decode-usage"


def test_usage_all_blank():
    v = build_vocab(["a"], "a")
    assert usage_from_decodes(["_|_|_"], v).counts == {}


def test_usage_blank_separated_repeats_count_twice():
    v = build_vocab(["a"], "a")
    assert usage_from_decodes(["a|_|a"], v).counts == {"a": 2}


def test_usage_unknown_token_named():
    v = build_vocab(["a"], "a")
    with pytest.raises(ValueError, match="'zz'"):
        usage_from_decodes(["a|zz"], v)


def _planted_corpus():
    rng = np.random.default_rng(0)
    words = []
    for _ in range(40):
        n = rng.integers(1, 4)
        parts = [
            rng.choice(["th", "the", "tha", "thth"], p=[0.4, 0.3, 0.2, 0.1])
            for _ in range(n)
        ]
        words.append("".join(parts))
    return [" ".join(words[i : i + 5]) for i in range(0, len(words), 5)]


PLANTED_TRAIN_CONFIG = {
    "frames_per_unit": 1,
    "feature_dim": 4,
    "noise_sigma": 0.05,
    "seed": 0,
    "epochs": 15,
    "learning_rate": 1e-3,
    "momentum": 0.99,
    "window": 3,
    # stride 2 halves the frame budget, so single-unit emissions cannot
    # cover the words and the model is pushed onto bi-grams
    "stride": 2,
}


def test_refine_keep_all_is_identity():
    vocab, report = refine_pipeline(
        _planted_corpus(),
        max_len=2,
        initial_policy={"min_count": 2, "top_k_per_length": {2: 3}},
        train_config={},
        refine_policy=None,
        base_units="thea",
    )
    assert report.final_grams == report.initial_grams
    assert report.dropped == []
    assert "th" in vocab


def test_refine_excluding_multiunit_grams_degenerates_to_ctc_vocab():
    vocab, _ = refine_pipeline(
        _planted_corpus(),
        max_len=2,
        initial_policy={"top_k_per_length": {2: 0}},
        train_config=PLANTED_TRAIN_CONFIG,
        refine_policy=None,
        base_units="thea",
    )
    assert vocab.tau == 1
    assert sorted(g.units for g in vocab.grams) == ["a", "e", "h", "t"]


def test_refine_planted_bigram_survives():
    vocab, report = refine_pipeline(
        _planted_corpus(),
        max_len=2,
        initial_policy={"min_count": 2, "top_k_per_length": {2: 3}},
        train_config=PLANTED_TRAIN_CONFIG,
        refine_policy={"min_count": 1},
        base_units="thea",
    )
    assert "th" in vocab
    for u in "thea":
        assert u in vocab  # base units always survive
    assert report.usage_counts.get("th", 0) > 0
    assert set(report.final_grams) <= set(report.initial_grams)
    assert "ht" in report.dropped  # planted distractor never gets used


def test_refine_empty_corpus_short_circuits():
    vocab, report = refine_pipeline(
        [], 2, {"min_count": 1}, {}, {"min_count": 1}, base_units="ab"
    )
    assert sorted(g.units for g in vocab.grams) == ["a", "b"]
    assert report.final_grams == report.initial_grams


def test_stats_file_roundtrip(tmp_path):
    stats = GramStats({"th": 12, "a": 30, "he": 12}, CORPUS_FREQUENCY)
    path = tmp_path / "stats.tsv"
    write_stats(stats, path)
    lines = path.read_text().splitlines()
    assert lines == ["30\ta", "12\the", "12\tth"]  # descending, ties lexicographic
    assert read_stats(path).counts == stats.counts


def test_stats_bad_line_reports_number(tmp_path):
    path = tmp_path / "stats.tsv"
    path.write_text("3\ta\nnot-a-count\tb\n")
    with pytest.raises(ValueError, match="line 2"):
        read_stats(path)
