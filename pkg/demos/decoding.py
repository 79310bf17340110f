"""Greedy vs beam decoding, and why the beam wins on gram vocabularies.

With multi-unit grams the probability of one label can be split across
several spellings (th-e vs t-h-e). Greedy reads frames one at a time and
never sees the combined mass; the beam search merges it.
"""

import numpy as np

from gramctc import (
    beam_search,
    brute_force_label_distribution,
    build_vocab,
    format_framewise,
    greedy_decode,
    log_softmax,
)

vocab = build_vocab(["t", "h", "e", "th"], base_units="the")
names = ["_"] + [g.units for g in vocab.grams]

# Hand-built posteriors over 3 frames. "the" mass is split three ways
# (t-h-e, th-th-e, th-blank-e); no single frame makes h the argmax.
post = np.zeros((3, vocab.total_symbols))
t, h, e, th = (vocab.gram_id(g) for g in ("t", "h", "e", "th"))
post[0, [0, t, h, e, th]] = [0.05, 0.40, 0.10, 0.10, 0.35]
post[1, [0, t, h, e, th]] = [0.34, 0.02, 0.33, 0.10, 0.21]
post[2, [0, t, h, e, th]] = [0.025, 0.025, 0.025, 0.90, 0.025]
log_post = np.log(post)

ids, label = greedy_decode(log_post, vocab)
print("framewise argmax:", format_framewise(ids, vocab))
print("greedy label:    ", repr(str(label)))

hyps = beam_search(log_post, vocab, beam_width=8, n_best=4)
print("\nbeam (width 8):")
for lab, score in hyps:
    print(f"  {str(lab)!r:8s} log p = {score:.4f}")

# The exact marginals confirm the beam ordering.
dist = brute_force_label_distribution(post, vocab)
print("\nexact label marginals:")
for text, mass in sorted(dist.items(), key=lambda kv: -kv[1])[:4]:
    print(f"  {text!r:8s} p = {mass:.4f}")

best = max(dist, key=dist.get)
print(f"\ngreedy={str(label)!r}  beam={str(hyps[0][0])!r}  exact argmax={best!r}")

# On random posteriors an exhaustive-width beam is exact, so moderate widths
# are usually already converged.
rng = np.random.default_rng(5)
logits = rng.normal(size=(4, vocab.total_symbols))
lp = log_softmax(logits)
for width in (1, 2, 4, 16, vocab.total_symbols ** 4):
    (lab, score), = beam_search(lp, vocab, beam_width=width, n_best=1)
    tag = "exhaustive" if width > 16 else f"width {width}"
    print(f"{tag:>10s}: {str(lab)!r} log p = {score:.6f}")
