"""Label lattices: the states s_i^j and their allowed transitions.

A state (i, j) says "the first i units of the label are done and the most
recent emission was a gram of length j" (j = 0 means it was blank). The
collapse rules are encoded once, here, as explicit predecessor lists; the
forward and backward passes then reduce to sums over those lists. The
forbidden move between two identical adjacent grams is handled by leaving
the offending predecessor out of the list rather than subtracting its
mass afterwards, which would be unsafe in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .vocab import GramVocab, Label, suffix_grams


@dataclass(frozen=True)
class LatticeState:
    """One lattice node.

    i: completed prefix length, 0..|l|.
    j: length of the last gram, 0..tau (0 = blank).
    gram_id: output column this state emits (blank_id when j = 0).
    same_gram_pred: the gram immediately before this one in the label could
        be the identical string, so the direct transition from it is banned.
    """

    i: int
    j: int
    gram_id: int
    same_gram_pred: bool = False


@dataclass
class Lattice:
    """Immutable per-label transition structure.

    states are ordered by (i, j). preds/succs are index lists and exact
    transposes of each other. The padded index/mask matrices are the same
    lists in rectangular form so a timestep update is one fancy-indexed
    gather; pred_idx rows are padded with 0 where pred_mask is False.
    """

    label: Label
    states: list[LatticeState]
    preds: list[list[int]]
    succs: list[list[int]]
    initials: list[int]
    finals: list[int]
    emit_ids: np.ndarray = field(repr=False)
    pred_idx: np.ndarray = field(repr=False)
    pred_mask: np.ndarray = field(repr=False)
    succ_idx: np.ndarray = field(repr=False)
    succ_mask: np.ndarray = field(repr=False)
    states_by_gram: dict[int, np.ndarray] = field(repr=False)

    @property
    def n_states(self) -> int:
        return len(self.states)


def _pad_index_lists(lists: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    width = max(len(xs) for xs in lists)
    idx = np.zeros((len(lists), width), dtype=np.int64)
    mask = np.zeros((len(lists), width), dtype=bool)
    for row, xs in enumerate(lists):
        idx[row, : len(xs)] = xs
        mask[row, : len(xs)] = True
    return idx, mask


def build_lattice(vocab: GramVocab, label: Label) -> Lattice:
    """Scan the label for valid states and wire up their transitions."""
    text = label.units
    L = len(text)

    states: list[LatticeState] = [LatticeState(i=0, j=0, gram_id=vocab.blank_id)]
    for i in range(1, L + 1):
        states.append(LatticeState(i=i, j=0, gram_id=vocab.blank_id))
        for j, gid in suffix_grams(vocab, label, i):
            same = i - j >= j and text[i - 2 * j : i - j] == text[i - j : i]
            states.append(LatticeState(i=i, j=j, gram_id=gid, same_gram_pred=same))
    states.sort(key=lambda s: (s.i, s.j))

    index = {(s.i, s.j): k for k, s in enumerate(states)}
    at_prefix: dict[int, list[int]] = {}
    for k, s in enumerate(states):
        at_prefix.setdefault(s.i, []).append(k)

    preds: list[list[int]] = []
    for k, s in enumerate(states):
        if s.j == 0:
            ps = list(at_prefix[s.i])  # includes the blank self-loop
        else:
            ps = [k]  # self-loop: repeated emissions of the gram collapse
            for p in at_prefix[s.i - s.j]:
                if s.same_gram_pred and states[p].j == s.j:
                    continue  # identical gram twice in a row would merge
                ps.append(p)
        preds.append(sorted(ps))

    succs: list[list[int]] = [[] for _ in states]
    for k, ps in enumerate(preds):
        for p in ps:
            succs[p].append(k)

    initials = [index[(0, 0)]]
    for i in range(1, min(vocab.tau, L) + 1):
        if (i, i) in index:
            initials.append(index[(i, i)])
    finals = [k for k, s in enumerate(states) if s.i == L]

    emit_ids = np.array([s.gram_id for s in states], dtype=np.int64)
    pred_idx, pred_mask = _pad_index_lists(preds)
    succ_idx, succ_mask = _pad_index_lists(succs)

    by_gram: dict[int, np.ndarray] = {}
    for k, s in enumerate(states):
        by_gram.setdefault(s.gram_id, []).append(k)
    by_gram = {g: np.array(ks, dtype=np.int64) for g, ks in by_gram.items()}

    return Lattice(
        label=label,
        states=states,
        preds=preds,
        succs=succs,
        initials=initials,
        finals=finals,
        emit_ids=emit_ids,
        pred_idx=pred_idx,
        pred_mask=pred_mask,
        succ_idx=succ_idx,
        succ_mask=succ_mask,
        states_by_gram=by_gram,
    )


def min_path_length(lattice: Lattice) -> int:
    """Fewest timesteps any path needs to reach a final state.

    Equals the size of the smallest decomposition of the label plus one
    forced blank per identical-adjacent-gram pair. Zero for the empty
    label (the empty path already collapses to it).
    """
    if len(lattice.label) == 0:
        return 0
    INF = float("inf")
    dist = [INF] * lattice.n_states
    # Within a prefix the blank depends on the gram states, so order
    # gram states first; across prefixes plain i-ascending works.
    order = sorted(
        range(lattice.n_states),
        key=lambda k: (lattice.states[k].i, lattice.states[k].j == 0),
    )
    initial = set(lattice.initials)
    for k in order:
        best = 1.0 if k in initial else INF
        for p in lattice.preds[k]:
            if p != k and dist[p] + 1 < best:
                best = dist[p] + 1
        dist[k] = best
    return int(min(dist[f] for f in lattice.finals))


def format_state(state: LatticeState, vocab: GramVocab) -> str:
    gram = "_" if state.j == 0 else vocab.gram_string(state.gram_id)
    return f"({state.i},{state.j},{gram})"


def lattice_edges(lattice: Lattice, vocab: GramVocab) -> list[str]:
    """One line per transition, for fixture diffing."""
    lines = []
    for k, state in enumerate(lattice.states):
        src = format_state(state, vocab)
        for t in lattice.succs[k]:
            lines.append(f"{src} -> {format_state(lattice.states[t], vocab)}")
    return lines
