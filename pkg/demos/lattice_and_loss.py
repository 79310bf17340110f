"""Walk through the core objects: a gram vocabulary, the per-label lattice,
and the exact loss/gradient it defines.
"""

import numpy as np

from gramctc import (
    build_vocab,
    build_lattice,
    encode_label,
    finite_difference_grad,
    gram_ctc_loss_grad,
    lattice_edges,
    min_path_length,
)

# A vocabulary is the base units plus any multi-unit grams. Base units are
# always usable, so every label stays encodable no matter what gets selected.
vocab = build_vocab(["C", "A", "T", "CA", "AT"], base_units="CAT")
print("grams:", [g.units for g in vocab.grams])
print("tau =", vocab.tau, " total symbols (with blank) =", vocab.total_symbols)

label = encode_label(vocab, "CAT")
lattice = build_lattice(vocab, label)
print(f"\nlattice for {label} has {lattice.n_states} states")
print("a path must emit at least", min_path_length(lattice), "frames")

print("\nedges (blank shown as _):")
for line in lattice_edges(lattice, vocab):
    print(" ", line)

# The loss marginalizes over every alignment AND every decomposition of the
# label into grams, so "CAT" can be spelled C-A-T, CA-T, or C-AT.
rng = np.random.default_rng(0)
logits = rng.normal(size=(5, vocab.total_symbols))
result = gram_ctc_loss_grad(logits, label, vocab, lattice)
print(f"\nloss on random logits: {result.loss:.6f}")
print("gradient rows sum to zero:", np.abs(result.grad.sum(axis=1)).max())

numeric = finite_difference_grad(logits, label, vocab)
rel = np.abs(result.grad - numeric) / np.maximum(np.abs(numeric), 1e-8)
print(f"max relative error vs central differences: {rel.max():.2e}")

# Too few frames for the label is a structured outcome, not a crash.
short = gram_ctc_loss_grad(np.zeros((1, vocab.total_symbols)), label, vocab)
print("\none frame for 'CAT':", "impossible" if short.impossible else short.loss)
