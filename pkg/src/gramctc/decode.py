"""Greedy max-decoding and prefix beam search over gram vocabularies.

The beam keeps one accumulator per (label-so-far, last emission) pair --
the same sufficient statistic as the lattice state -- so the many gram
decompositions and blank placements of one label are merged, and scores
are marginals rather than best-path probabilities.
"""

from __future__ import annotations

import numpy as np

from .oracle import collapse
from .vocab import GramVocab, Label

BLANK_TOKEN = "_"


def greedy_decode(log_post: np.ndarray, vocab: GramVocab) -> tuple[np.ndarray, Label]:
    """Per-frame argmax (ties to the lowest id) plus the collapsed label."""
    log_post = np.asarray(log_post, dtype=np.float64)
    if log_post.ndim != 2 or log_post.shape[1] != vocab.total_symbols:
        raise ValueError(
            f"posteriors must be T x {vocab.total_symbols}, got {log_post.shape}"
        )
    if log_post.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), Label("")
    ids = np.argmax(log_post, axis=1).astype(np.int64)
    return ids, collapse(ids, vocab)


def format_framewise(gram_ids: np.ndarray, vocab: GramVocab) -> str:
    """Frames joined by "|", blank rendered as "_"."""
    return "|".join(
        BLANK_TOKEN if gid == vocab.blank_id else vocab.gram_string(int(gid))
        for gid in gram_ids
    )


def parse_framewise(line: str, vocab: GramVocab) -> list[int]:
    """Inverse of format_framewise; unknown tokens are rejected by name."""
    line = line.strip()
    if not line:
        return []
    ids = []
    for token in line.split("|"):
        if token == BLANK_TOKEN:
            ids.append(vocab.blank_id)
            continue
        gid = vocab.gram_id(token)
        if gid is None:
            raise ValueError(f"token {token!r} is not in the vocabulary")
        ids.append(gid)
    return ids


def _prefix_rank_key(item: tuple[str, float]) -> tuple[float, int, str]:
    prefix, score = item
    return (-score, len(prefix), prefix)


def beam_search(
    log_post: np.ndarray,
    vocab: GramVocab,
    beam_width: int,
    n_best: int = 1,
) -> list[tuple[Label, float]]:
    """Marginal prefix search; returns up to n_best (label, log-prob) pairs.

    Emitting the same gram id twice in a row extends the previous emission
    (prefix unchanged); anything else appends its string. Pruning keeps the
    beam_width best prefixes by merged score, ties going to the shorter
    then lexicographically smaller label.
    """
    log_post = np.asarray(log_post, dtype=np.float64)
    if log_post.ndim != 2 or log_post.shape[1] != vocab.total_symbols:
        raise ValueError(
            f"posteriors must be T x {vocab.total_symbols}, got {log_post.shape}"
        )
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    if n_best < 1:
        raise ValueError("n_best must be >= 1")

    blank = vocab.blank_id
    gram_strings = {g.id: g.units for g in vocab.grams}

    # accumulators: (prefix, last emission id; blank means extendable)
    beam: dict[tuple[str, int], float] = {("", blank): 0.0}
    for row in log_post:
        nxt: dict[tuple[str, int], float] = {}

        def add(key: tuple[str, int], value: float) -> None:
            old = nxt.get(key)
            nxt[key] = value if old is None else float(np.logaddexp(old, value))

        for (prefix, last), lv in beam.items():
            add((prefix, blank), lv + row[blank])
            for gid, units in gram_strings.items():
                if gid == last:
                    add((prefix, gid), lv + row[gid])
                else:
                    add((prefix + units, gid), lv + row[gid])

        totals: dict[str, float] = {}
        for (prefix, _), lv in nxt.items():
            old = totals.get(prefix)
            totals[prefix] = lv if old is None else float(np.logaddexp(old, lv))
        keep = {
            prefix
            for prefix, _ in sorted(totals.items(), key=_prefix_rank_key)[:beam_width]
        }
        beam = {key: lv for key, lv in nxt.items() if key[0] in keep}

    totals = {}
    for (prefix, _), lv in beam.items():
        old = totals.get(prefix)
        totals[prefix] = lv if old is None else float(np.logaddexp(old, lv))
    ranked = sorted(totals.items(), key=_prefix_rank_key)[:n_best]
    return [(Label(prefix), score) for prefix, score in ranked]
