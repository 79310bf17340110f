"""Brute-force reference: enumerate every path, collapse, sum products.

The two defining equations, done literally and in plain probability space.
Exponential in T by construction; the cap keeps anyone from pointing it at
a real instance. Nothing here shares numerics with the DP kernel.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from .vocab import GramVocab, Label

DEFAULT_CAP = 10**6


def collapse(path: Sequence[int], vocab: GramVocab) -> Label:
    """Merge adjacent identical gram ids, drop blanks, concatenate.

    Identity is by gram id, not character content: ['a','ab'] stays two
    emissions and collapses to "aab".
    """
    out: list[str] = []
    prev = None
    for gid in path:
        gid = int(gid)
        if gid != prev and gid != vocab.blank_id:
            out.append(vocab.gram_string(gid))
        prev = gid
    return Label("".join(out))


def _check_posteriors(post: np.ndarray, vocab: GramVocab) -> np.ndarray:
    post = np.asarray(post, dtype=np.float64)
    if post.ndim != 2 or post.shape[1] != vocab.total_symbols:
        raise ValueError(
            f"posteriors must be T x {vocab.total_symbols}, got {post.shape}"
        )
    if post.shape[0] and not np.allclose(post.sum(axis=1), 1.0, atol=1e-8):
        raise ValueError("posterior rows must sum to 1 (probabilities, not logs)")
    return post


def _iter_paths(
    post: np.ndarray, vocab: GramVocab, cap: int
) -> Iterable[tuple[tuple[int, ...], float]]:
    T, V = post.shape
    bound = V**T
    if bound > cap:
        raise ValueError(f"|G'|^T = {bound} exceeds enumeration cap {cap}")
    rows = [tuple(float(p) for p in post[t]) for t in range(T)]
    for path in itertools.product(range(V), repeat=T):
        prob = 1.0
        for t, gid in enumerate(path):
            prob *= rows[t][gid]
        yield path, prob


def brute_force_likelihood(
    post: np.ndarray,
    label: Label | str,
    vocab: GramVocab,
    cap: int = DEFAULT_CAP,
) -> float:
    """Exact p(label | posteriors): sum over all paths that collapse to it."""
    post = _check_posteriors(post, vocab)
    target = str(label)
    total = 0.0
    for path, prob in _iter_paths(post, vocab, cap):
        if collapse(path, vocab).units == target:
            total += prob
    return total


def brute_force_label_distribution(
    post: np.ndarray, vocab: GramVocab, cap: int = DEFAULT_CAP
) -> dict[str, float]:
    """Probability of every label reachable by collapsing some path."""
    post = _check_posteriors(post, vocab)
    dist: dict[str, float] = {}
    for path, prob in _iter_paths(post, vocab, cap):
        key = collapse(path, vocab).units
        dist[key] = dist.get(key, 0.0) + prob
    return dist
