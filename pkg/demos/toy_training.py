#!/usr/bin/env python3
"""End-to-end toy run: synthetic speech-like data, three training modes.

The data is deliberately easy (one prototype vector per base unit plus
noise) so a linear model with a context window can learn it in seconds.
The interesting part is the comparison:

  * gram loss at stride 2: half the frames, so multi-unit grams must
    carry doubled letters that single frames no longer can;
  * vanilla CTC at stride 1 as the baseline;
  * the joint loss, whose two components both have to fall.
"""

import statistics
import time

import numpy as np

from gramctc import (
    SynthConfig,
    build_vocab,
    evaluate_cer,
    init_model,
    synth_dataset,
    train,
    unigram_vocab,
)

UNITS = "abcde"
train_set = synth_dataset(SynthConfig(UNITS, frames_per_unit=4, feature_dim=5,
                                      noise_sigma=0.3, num_samples=200, seed=0))
test_set = synth_dataset(SynthConfig(UNITS, frames_per_unit=4, feature_dim=5,
                                     noise_sigma=0.3, num_samples=50, seed=100))
print(f"{len(train_set)} train / {len(test_set)} test utterances")

# Doubled-letter bi-grams: repeats are what CTC-style decoders drop, since
# two adjacent identical emissions collapse into one.
gram_vocab = build_vocab(list(UNITS) + [u + u for u in UNITS], UNITS)
uni = unigram_vocab(UNITS)

print("\n[1] gram loss, stride 2, window 7")
model = init_model(window=7, feature_dim=10, total_symbols=gram_vocab.total_symbols)
t0 = time.perf_counter()
run = train(model, train_set, gram_vocab, loss_kind="gram", epochs=40,
            learning_rate=1e-3, momentum=0.99, seed=0, stride=2)
gram_secs = time.perf_counter() - t0
cer = evaluate_cer(run.model, test_set, gram_vocab, stride=2, beam_width=8)
print(f"    loss {run.epoch_losses[0]:.3f} -> {run.epoch_losses[-1]:.3f}"
      f"   held-out CER {cer['cer']:.3f}   ({gram_secs:.1f}s)")
gram_epoch = statistics.median(run.epoch_seconds)

print("\n[2] vanilla CTC, stride 1 (baseline)")
model = init_model(window=7, feature_dim=5, total_symbols=uni.total_symbols)
run = train(model, train_set, uni, loss_kind="ctc", epochs=40,
            learning_rate=1e-3, momentum=0.99, seed=0, stride=1)
cer_ctc = evaluate_cer(run.model, test_set, uni, stride=1, beam_width=8)
print(f"    loss {run.epoch_losses[0]:.3f} -> {run.epoch_losses[-1]:.3f}"
      f"   held-out CER {cer_ctc['cer']:.3f}")

print("\n[3] gram loss, stride 1 (same kernel, doubled frames)")
model = init_model(window=7, feature_dim=5, total_symbols=gram_vocab.total_symbols)
run = train(model, train_set, gram_vocab, loss_kind="gram", epochs=10,
            learning_rate=1e-3, momentum=0.99, seed=0, stride=1)
uni_epoch = statistics.median(run.epoch_seconds)
print(f"    median epoch: stride 2 = {gram_epoch * 1e3:.0f} ms,"
      f" stride 1 = {uni_epoch * 1e3:.0f} ms"
      f" (ratio {gram_epoch / uni_epoch:.2f})")

print("\n[4] joint loss (0.5 gram + 0.5 vanilla on the shared head)")
model = init_model(window=7, feature_dim=10, total_symbols=gram_vocab.total_symbols)
run = train(model, train_set, gram_vocab, loss_kind="joint", epochs=10,
            learning_rate=1e-3, momentum=0.99, seed=0, stride=2)
for name, losses in run.component_losses.items():
    arrow = " -> ".join(f"{x:.3f}" for x in (losses[0], losses[-1]))
    falling = all(b < a for a, b in zip(losses, losses[1:]))
    print(f"    {name}: {arrow}   strictly decreasing: {falling}")

gap = cer["cer"] - cer_ctc["cer"]
print(f"\nstride-2 gram model vs stride-1 CTC: CER gap {gap:+.3f}"
      f" at {gram_epoch / uni_epoch:.0%} of the epoch time")
