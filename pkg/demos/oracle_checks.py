"""Cross-check the dynamic-programming loss against brute force.

Three independent witnesses on small instances: path enumeration in
probability space, the normalization identity (label probabilities sum
to one), and a vanilla CTC implementation for uni-gram vocabularies.
"""

import numpy as np

from gramctc import (
    brute_force_label_distribution,
    brute_force_likelihood,
    build_vocab,
    ctc_loss_grad,
    encode_label,
    gram_ctc_loss_grad,
    log_softmax,
    unigram_vocab,
)

rng = np.random.default_rng(7)
vocab = build_vocab(["a", "b", "ab"], base_units="ab")

# 1. Brute force: enumerate every path of gram ids, collapse each one, and
#    sum probability mass per label. Agreement is to machine precision.
print("DP loss vs path enumeration")
worst = 0.0
for trial in range(20):
    T = int(rng.integers(1, 6))
    text = "".join(rng.choice(list("ab"), size=rng.integers(0, 4)))
    logits = rng.normal(size=(T, vocab.total_symbols))
    label = encode_label(vocab, text)
    res = gram_ctc_loss_grad(logits, label, vocab)
    p = brute_force_likelihood(np.exp(log_softmax(logits)), label, vocab)
    if res.impossible:
        assert p == 0.0
        continue
    rel = abs(np.exp(-res.loss) - p) / p
    worst = max(worst, rel)
print(f"  max relative error over 20 instances: {worst:.2e}")

# 2. Normalization: the model defines a distribution over labels, so the
#    brute-force masses must total one.
logits = rng.normal(size=(3, vocab.total_symbols))
dist = brute_force_label_distribution(np.exp(log_softmax(logits)), vocab)
print("\nlabel distribution at T=3")
for text, mass in sorted(dist.items(), key=lambda kv: -kv[1])[:5]:
    print(f"  p({text or '<empty>'!r}) = {mass:.4f}")
print(f"  total mass = {sum(dist.values()):.15f}")

# 3. With only single-unit grams the lattice degenerates to classic CTC,
#    so an independently written CTC must produce the same loss and grad.
uni = unigram_vocab("abc")
print("\nuni-gram special case vs reference CTC")
worst_loss, worst_grad = 0.0, 0.0
for trial in range(20):
    T = int(rng.integers(2, 10))
    text = "".join(rng.choice(list("abc"), size=rng.integers(1, 4)))
    logits = rng.normal(size=(T, uni.total_symbols))
    ours = gram_ctc_loss_grad(logits, encode_label(uni, text), uni)
    ref = ctc_loss_grad(logits, text, "abc")
    assert ours.impossible == ref.impossible
    if ours.impossible:
        continue
    worst_loss = max(worst_loss, abs(ours.loss - ref.loss))
    worst_grad = max(worst_grad, np.abs(ours.grad - ref.grad).max())
print(f"  max |loss diff| = {worst_loss:.2e}   max |grad diff| = {worst_grad:.2e}")
