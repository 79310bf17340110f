"""Log-space forward-backward likelihood, analytic gradient, joint loss.

Everything stays in the log domain until the final gradient combination.
The per-timestep update is one fancy-indexed gather over the lattice's
padded predecessor (or successor) matrix followed by a max-shifted
logsumexp, so there is no Python loop over states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .lattice import Lattice, build_lattice
from .vocab import GramVocab, Label

NEG_INF = -np.inf


@dataclass
class FBResult:
    """Forward-backward tables plus the two likelihood readouts.

    log_likelihood comes from the forward pass alone (sum over finals at
    t=T); z_per_t[t] re-derives it at every timestep from alpha*beta/y,
    which must agree -- the standard internal consistency check.
    """

    log_alpha: np.ndarray
    log_beta: np.ndarray
    log_likelihood: float
    z_per_t: np.ndarray

    @property
    def impossible(self) -> bool:
        return not np.isfinite(self.log_likelihood)

    @property
    def consistency_gap(self) -> float:
        """max_t |log Z_t - log p|; 0.0 for empty/impossible instances."""
        if self.impossible or len(self.z_per_t) == 0:
            return 0.0
        return float(np.max(np.abs(self.z_per_t - self.log_likelihood)))


@dataclass
class LossGrad:
    """Negative log-likelihood and its gradient w.r.t. the logits.

    grad is None exactly when the alignment is impossible (T shorter than
    the minimum path): loss is +inf and the caller decides what to do.
    """

    loss: float
    grad: np.ndarray | None
    impossible: bool = False


def _as_logits(logits: np.ndarray, total_symbols: int | None = None) -> np.ndarray:
    x = np.ascontiguousarray(np.asarray(logits, dtype=np.float64))
    if x.ndim != 2:
        raise ValueError(f"logits must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("logits contain non-finite values")
    if total_symbols is not None and x.shape[1] != total_symbols:
        raise ValueError(
            f"logits have {x.shape[1]} columns, vocabulary needs {total_symbols}"
        )
    return x


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise log-probabilities via max shift; safe for huge scores."""
    x = _as_logits(logits)
    if x.shape[0] == 0:
        return x.copy()
    z = x - x.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _lse_rows(vals: np.ndarray) -> np.ndarray:
    """logsumexp along the last axis; all-(-inf) rows stay -inf, no NaN."""
    m = np.max(vals, axis=-1)
    out = np.full(m.shape, NEG_INF)
    safe = m > NEG_INF
    if np.any(safe):
        shifted = vals[safe] - m[safe, None]
        out[safe] = m[safe] + np.log(np.exp(shifted).sum(axis=-1))
    return out


def _gather_lse(prev: np.ndarray, idx: np.ndarray, mask: np.ndarray) -> np.ndarray:
    vals = np.where(mask, prev[idx], NEG_INF)
    return _lse_rows(vals)


def _check_post(lattice: Lattice, log_post: np.ndarray) -> np.ndarray:
    log_post = np.asarray(log_post, dtype=np.float64)
    if log_post.ndim != 2:
        raise ValueError("posteriors must be 2-D")
    if lattice.n_states and log_post.shape[1] <= int(lattice.emit_ids.max()):
        raise ValueError(
            f"posteriors have {log_post.shape[1]} columns, lattice emits "
            f"gram id {int(lattice.emit_ids.max())}"
        )
    return log_post


def forward(lattice: Lattice, log_post: np.ndarray) -> np.ndarray:
    """log alpha, shape T x |S|; rows t>0 read only row t-1."""
    log_post = _check_post(lattice, log_post)
    T = log_post.shape[0]
    la = np.full((T, lattice.n_states), NEG_INF)
    if T == 0:
        return la
    emit = log_post[:, lattice.emit_ids]
    la[0, lattice.initials] = emit[0, lattice.initials]
    for t in range(1, T):
        la[t] = emit[t] + _gather_lse(la[t - 1], lattice.pred_idx, lattice.pred_mask)
    return la


def backward(lattice: Lattice, log_post: np.ndarray) -> np.ndarray:
    """log beta, the mirror recursion over successor lists."""
    log_post = _check_post(lattice, log_post)
    T = log_post.shape[0]
    lb = np.full((T, lattice.n_states), NEG_INF)
    if T == 0:
        return lb
    emit = log_post[:, lattice.emit_ids]
    lb[T - 1, lattice.finals] = emit[T - 1, lattice.finals]
    for t in range(T - 2, -1, -1):
        lb[t] = emit[t] + _gather_lse(lb[t + 1], lattice.succ_idx, lattice.succ_mask)
    return lb


def likelihood(lattice: Lattice, log_post: np.ndarray) -> FBResult:
    """Run both passes and read out log p plus the per-t consistency values.

    T below the minimum path length is not an error here: the finals stay
    at -inf and the result reports itself impossible.
    """
    log_post = _check_post(lattice, log_post)
    T = log_post.shape[0]
    if T == 0:
        ll = 0.0 if len(lattice.label) == 0 else NEG_INF
        empty = np.zeros((0, lattice.n_states))
        return FBResult(empty, empty.copy(), ll, np.zeros(0))
    la = forward(lattice, log_post)
    lb = backward(lattice, log_post)
    ll = float(_lse_rows(la[T - 1, lattice.finals][None, :])[0])
    emit = log_post[:, lattice.emit_ids]
    z_per_t = _lse_rows(la + lb - emit)
    return FBResult(la, lb, ll, z_per_t)


def gram_ctc_loss_grad(
    logits: np.ndarray,
    label: Label,
    vocab: GramVocab,
    lattice: Lattice | None = None,
) -> LossGrad:
    """Negative log-likelihood of the label and d(loss)/d(logits).

    grad[t][k] = y_k^t - exp(LSE over states of gram k of (log alpha +
    log beta) - log y_k^t - log Z_t); states of gram k is precomputed on
    the lattice. Passing a prebuilt lattice skips reconstruction when the
    same label is scored many times.
    """
    x = _as_logits(logits, vocab.total_symbols)
    if lattice is None:
        lattice = build_lattice(vocab, label)
    log_post = log_softmax(x)
    fb = likelihood(lattice, log_post)
    if fb.impossible:
        return LossGrad(loss=np.inf, grad=None, impossible=True)
    T, V = x.shape
    if T == 0:
        return LossGrad(loss=-fb.log_likelihood, grad=np.zeros((0, V)))
    occ = np.full((T, V), NEG_INF)
    ab = fb.log_alpha + fb.log_beta
    for gid, ks in lattice.states_by_gram.items():
        occ[:, gid] = _lse_rows(ab[:, ks])
    grad = np.exp(log_post) - np.exp(occ - log_post - fb.z_per_t[:, None])
    return LossGrad(loss=-fb.log_likelihood, grad=grad)


def finite_difference_grad(
    logits: np.ndarray,
    label: Label,
    vocab: GramVocab,
    h: float = 1e-5,
    lattice: Lattice | None = None,
) -> np.ndarray:
    """Central differences of the loss, entry by entry.

    Uses only scalar loss evaluations, never the analytic gradient, so it
    stands as an independent check of it. O(T*V) full DP runs: keep the
    instances small.
    """
    x = _as_logits(logits, vocab.total_symbols)
    if lattice is None:
        lattice = build_lattice(vocab, label)
    out = np.zeros_like(x)
    for t in range(x.shape[0]):
        for k in range(x.shape[1]):
            bumped = x.copy()
            bumped[t, k] = x[t, k] + h
            hi = gram_ctc_loss_grad(bumped, label, vocab, lattice).loss
            bumped[t, k] = x[t, k] - h
            lo = gram_ctc_loss_grad(bumped, label, vocab, lattice).loss
            out[t, k] = (hi - lo) / (2.0 * h)
    return out


@dataclass
class JointLossGrad:
    """Weighted multi-term loss.

    Terms may live on different logits matrices (different vocabularies,
    strides, column blocks), so gradients are kept per term, each already
    scaled by its weight. combined_grad() sums them when every term shares
    one logits matrix shape.
    """

    loss: float
    term_losses: list[float]
    grads: list[np.ndarray | None]
    impossible: bool = False

    def combined_grad(self) -> np.ndarray:
        if self.impossible:
            raise ValueError("impossible alignment: no gradient")
        shapes = {g.shape for g in self.grads}
        if len(shapes) != 1:
            raise ValueError(f"terms have mismatched gradient shapes {shapes}")
        return sum(self.grads)


def joint_loss(
    terms: Sequence[tuple[Callable[[], LossGrad], float]],
) -> JointLossGrad:
    """Weighted sum of independently computed loss terms.

    Timestep counts must agree across terms (they describe one utterance);
    any impossible term makes the whole sample impossible.
    """
    if not terms:
        raise ValueError("at least one term required")
    weights = [w for _, w in terms]
    if any(w < 0 for w in weights):
        raise ValueError("weights must be >= 0")
    if not any(w > 0 for w in weights):
        raise ValueError("at least one weight must be > 0")

    results = [fn() for fn, _ in terms]
    ts = {r.grad.shape[0] for r in results if r.grad is not None}
    if len(ts) > 1:
        raise ValueError(f"terms disagree on timestep count: {sorted(ts)}")
    if any(r.impossible for r in results):
        return JointLossGrad(
            loss=np.inf,
            term_losses=[r.loss for r in results],
            grads=[None] * len(results),
            impossible=True,
        )
    return JointLossGrad(
        loss=float(sum(w * r.loss for r, w in zip(results, weights))),
        term_losses=[r.loss for r in results],
        grads=[w * r.grad for r, w in zip(results, weights)],
    )
