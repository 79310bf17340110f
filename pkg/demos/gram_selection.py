#!/usr/bin/env python3
"""Select grams from a corpus, then let a trained model vote on them.

Pipeline: count word-internal substrings, filter by frequency, train a
toy model on synthetic utterances, decode the training set, and keep
only the grams the model actually emits. A planted high-frequency pair
survives; its reversal, which the corpus never contains, is never even
counted.
"""

import numpy as np

from gramctc import count_corpus_grams, filter_grams, refine_pipeline

rng = np.random.default_rng(0)
words = rng.choice(["th", "the", "tha", "thth"], size=40, p=[0.4, 0.3, 0.2, 0.1])
corpus = [" ".join(words[i : i + 5]) for i in range(0, 40, 5)]
print("corpus sample:", corpus[0])

stats = count_corpus_grams(corpus, max_len=2, base_units="thea")
ranked = sorted(stats.counts.items(), key=lambda kv: (-kv[1], kv[0]))
print("\nsubstring counts:")
for gram, n in ranked:
    print(f"  {n:3d}  {gram}")

kept = filter_grams(stats, base_units="thea", min_count=10, top_k_per_length={2: 2})
print("\nafter min_count=10, top 2 bi-grams:", kept)

vocab, report = refine_pipeline(
    corpus,
    max_len=2,
    initial_policy={"min_count": 5},
    train_config={
        "frames_per_unit": 1,
        "feature_dim": 4,
        "noise_sigma": 0.05,
        "seed": 0,
        "epochs": 15,
        "learning_rate": 1e-3,
        "momentum": 0.99,
        "window": 3,
        "stride": 2,
    },
    refine_policy={"min_count": 1},
    base_units="thea",
)
print("\nrefinement over", report.epochs_trained, "epochs")
print("  initial:", report.initial_grams)
print("  usage:  ", dict(sorted(report.usage_counts.items())))
print("  dropped:", report.dropped)
print("  final:  ", [g.units for g in vocab.grams])
