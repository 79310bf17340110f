"""Gram-CTC: sequence labelling loss over multi-unit grams.

The library marginalizes jointly over alignments and target decompositions:
a vocabulary of grams (contiguous runs of base units, plus blank) defines a
per-label lattice, and the forward-backward kernel turns logits into an
exact negative log-likelihood and gradient. Around the kernel: a vanilla
CTC reference, brute-force oracles, greedy/beam decoders, a gram-selection
pipeline, and a toy training harness.
"""

from .vocab import (
    BLANK_ID,
    Gram,
    GramVocab,
    Label,
    VocabError,
    build_vocab,
    encode_label,
    load_vocab,
    save_vocab,
    suffix_grams,
    unigram_vocab,
)
from .lattice import (
    Lattice,
    LatticeState,
    build_lattice,
    lattice_edges,
    min_path_length,
)
from .loss import (
    FBResult,
    JointLossGrad,
    LossGrad,
    backward,
    finite_difference_grad,
    forward,
    gram_ctc_loss_grad,
    joint_loss,
    likelihood,
    log_softmax,
)
from .refctc import ctc_loss_grad
from .oracle import (
    brute_force_label_distribution,
    brute_force_likelihood,
    collapse,
)
from .decode import beam_search, format_framewise, greedy_decode, parse_framewise
from .formats import (
    read_dataset,
    read_history,
    read_logits,
    write_dataset,
    write_history,
    write_logits,
)
from .gramselect import (
    GramStats,
    RefineReport,
    count_corpus_grams,
    filter_grams,
    refine_pipeline,
    usage_from_decodes,
)
from .toytrain import (
    SynthConfig,
    ToyModel,
    TrainResult,
    apply_stride,
    evaluate_cer,
    init_model,
    levenshtein,
    model_logits,
    synth_dataset,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BLANK_ID",
    "FBResult",
    "Gram",
    "GramStats",
    "GramVocab",
    "JointLossGrad",
    "Label",
    "Lattice",
    "LatticeState",
    "LossGrad",
    "RefineReport",
    "SynthConfig",
    "ToyModel",
    "TrainResult",
    "VocabError",
    "apply_stride",
    "backward",
    "beam_search",
    "brute_force_label_distribution",
    "brute_force_likelihood",
    "build_lattice",
    "build_vocab",
    "collapse",
    "count_corpus_grams",
    "ctc_loss_grad",
    "encode_label",
    "evaluate_cer",
    "filter_grams",
    "finite_difference_grad",
    "format_framewise",
    "forward",
    "gram_ctc_loss_grad",
    "greedy_decode",
    "init_model",
    "joint_loss",
    "lattice_edges",
    "levenshtein",
    "likelihood",
    "load_vocab",
    "log_softmax",
    "min_path_length",
    "model_logits",
    "parse_framewise",
    "read_dataset",
    "read_history",
    "read_logits",
    "refine_pipeline",
    "save_vocab",
    "suffix_grams",
    "synth_dataset",
    "train",
    "unigram_vocab",
    "usage_from_decodes",
    "write_dataset",
    "write_history",
    "write_logits",
]
