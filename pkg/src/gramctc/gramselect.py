"""Iterative gram selection: corpus counts, filtering, decode-driven refinement.

The pipeline is the subword-discovery loop: count substrings, keep the
frequent ones, train a small model with that vocabulary, then keep only
the grams the trained model actually emits. Base units always survive
every filter so labels stay encodable.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .decode import format_framewise, greedy_decode, parse_framewise
from .loss import log_softmax
from .vocab import GramVocab, Label, build_vocab

log = logging.getLogger(__name__)

CORPUS_FREQUENCY = "corpus-frequency"
DECODE_USAGE = "decode-usage"


@dataclass
class GramStats:
    counts: dict[str, int]
    source: str
    skipped_units: int = 0


def count_corpus_grams(
    corpus: Iterable[str], max_len: int, base_units: Sequence[str] | str
) -> GramStats:
    """Count every contiguous substring of length 1..max_len inside words.

    Words are whitespace-delimited; grams never span a word boundary.
    Units outside the base set break the word there and are tallied in
    skipped_units.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    base = set(base_units)
    counts: Counter[str] = Counter()
    skipped = 0
    for line in corpus:
        for word in line.split():
            segments: list[str] = []
            run: list[str] = []
            for unit in word:
                if unit in base:
                    run.append(unit)
                    continue
                skipped += 1
                if run:
                    segments.append("".join(run))
                    run = []
            if run:
                segments.append("".join(run))
            for segment in segments:
                for start in range(len(segment)):
                    top = min(max_len, len(segment) - start)
                    for length in range(1, top + 1):
                        counts[segment[start : start + length]] += 1
    if skipped:
        log.warning("skipped %d units outside the base set", skipped)
    return GramStats(counts=dict(counts), source=CORPUS_FREQUENCY, skipped_units=skipped)


def filter_grams(
    stats: GramStats,
    base_units: Sequence[str] | str,
    min_count: float | None = None,
    top_k_per_length: Mapping[int, int] | None = None,
) -> list[str]:
    """Select gram strings by frequency; base units are always included.

    min_count drops rare grams; top_k_per_length then caps each gram length
    separately (lengths without a cap keep all survivors). Ties at a cutoff
    break lexicographically. Output order: base units first, then selected
    grams by (length, count desc, string).
    """
    units = list(base_units)
    survivors = [
        (g, c)
        for g, c in stats.counts.items()
        if min_count is None or c >= min_count
    ]
    if top_k_per_length is not None:
        by_length: dict[int, list[tuple[str, int]]] = {}
        for g, c in survivors:
            by_length.setdefault(len(g), []).append((g, c))
        survivors = []
        for length, items in by_length.items():
            items.sort(key=lambda gc: (-gc[1], gc[0]))
            k = top_k_per_length.get(length)
            survivors.extend(items if k is None else items[:k])
    chosen = {g for g, _ in survivors} - set(units)
    ordered = sorted(chosen, key=lambda g: (len(g), -stats.counts[g], g))
    return units + ordered


def usage_from_decodes(dumps: Iterable[str], vocab: GramVocab) -> GramStats:
    """Count collapsed emissions in framewise dumps (adjacent repeats merge).

    Usage measures how often a gram is chosen, not how long it is held, so
    a gram emitted across three consecutive frames counts once.
    """
    counts: Counter[str] = Counter()
    for line in dumps:
        prev = None
        for gid in parse_framewise(line, vocab):
            if gid != prev and gid != vocab.blank_id:
                counts[vocab.gram_string(gid)] += 1
            prev = gid
    return GramStats(counts=dict(counts), source=DECODE_USAGE)


@dataclass
class RefineReport:
    initial_grams: list[str]
    final_grams: list[str]
    dropped: list[str]
    usage_counts: dict[str, int] = field(default_factory=dict)
    corpus_skipped_units: int = 0
    epochs_trained: int = 0
    final_train_loss: float = float("nan")


def refine_pipeline(
    corpus: Iterable[str],
    max_len: int,
    initial_policy: Mapping,
    train_config: Mapping,
    refine_policy: Mapping | None,
    base_units: Sequence[str] | str,
) -> tuple[GramVocab, RefineReport]:
    """count -> filter -> train a toy model -> decode -> filter by usage.

    Policies are keyword dicts for filter_grams. refine_policy None means
    keep-all: the initial vocabulary is returned untouched (no training
    run, since its outcome could not change anything).

    train_config keys: frames_per_unit, feature_dim, noise_sigma, seed,
    epochs, learning_rate, momentum, window, stride (all optional with
    toy-scale defaults). Training samples are the corpus words, one
    utterance per word, with synthetic features.
    """
    from . import toytrain  # local import: toytrain itself uses this module's vocab

    lines = list(corpus)
    stats = count_corpus_grams(lines, max_len, base_units)
    initial_strings = filter_grams(stats, base_units, **dict(initial_policy))
    vocab = build_vocab(initial_strings, base_units)

    if refine_policy is None:
        report = RefineReport(
            initial_grams=initial_strings,
            final_grams=initial_strings,
            dropped=[],
            corpus_skipped_units=stats.skipped_units,
        )
        return vocab, report

    cfg = dict(train_config)
    base = set(base_units)
    words = [
        w
        for line in lines
        # out-of-vocabulary units break words, matching the counter
        for w in "".join(u if u in base or u.isspace() else " " for u in line).split()
    ]
    if not words:
        report = RefineReport(
            initial_grams=initial_strings,
            final_grams=initial_strings,
            dropped=[],
            corpus_skipped_units=stats.skipped_units,
        )
        return vocab, report
    labels = [Label(w) for w in words]
    features = toytrain.synth_features_for_labels(
        labels,
        base_units=base_units,
        frames_per_unit=int(cfg.get("frames_per_unit", 1)),
        feature_dim=int(cfg.get("feature_dim", len(list(base_units)))),
        noise_sigma=float(cfg.get("noise_sigma", 0.1)),
        seed=int(cfg.get("seed", 0)),
    )
    stride = int(cfg.get("stride", 1))
    dataset = [
        (toytrain.apply_stride(f, stride), lab) for f, lab in zip(features, labels)
    ]
    window = int(cfg.get("window", 3))
    model = toytrain.init_model(
        window=window,
        feature_dim=dataset[0][0].shape[1],
        total_symbols=vocab.total_symbols,
        seed=int(cfg.get("seed", 0)),
    )
    result = toytrain.train(
        model,
        dataset,
        vocab,
        epochs=int(cfg.get("epochs", 8)),
        learning_rate=float(cfg.get("learning_rate", 1e-3)),
        momentum=float(cfg.get("momentum", 0.99)),
        seed=int(cfg.get("seed", 0)),
    )

    dumps = []
    for feats, _ in dataset:
        logits = toytrain.model_logits(result.model, feats)
        ids, _ = greedy_decode(log_softmax(logits), vocab)
        dumps.append(format_framewise(ids, vocab))
    usage = usage_from_decodes(dumps, vocab)
    final_strings = filter_grams(usage, base_units, **dict(refine_policy))
    final_vocab = build_vocab(final_strings, base_units)

    report = RefineReport(
        initial_grams=initial_strings,
        final_grams=final_strings,
        dropped=sorted(set(initial_strings) - set(final_strings)),
        usage_counts=usage.counts,
        corpus_skipped_units=stats.skipped_units,
        epochs_trained=len(result.epoch_losses),
        final_train_loss=result.epoch_losses[-1] if result.epoch_losses else float("nan"),
    )
    return final_vocab, report


def write_stats(stats: GramStats, path) -> None:
    """Stats file: "count<TAB>gram" lines, descending count then gram."""
    from pathlib import Path

    rows = sorted(stats.counts.items(), key=lambda gc: (-gc[1], gc[0]))
    Path(path).write_text(
        "".join(f"{c}\t{g}\n" for g, c in rows), encoding="utf-8"
    )


def read_stats(path, source: str = CORPUS_FREQUENCY) -> GramStats:
    from pathlib import Path

    counts: dict[str, int] = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line:
            continue
        try:
            count, gram = line.split("\t", 1)
            counts[gram] = int(count)
        except ValueError as exc:
            raise ValueError(f"bad stats line {n}: {line!r}") from exc
    return GramStats(counts=counts, source=source)
