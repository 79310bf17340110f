"""Classic CTC over the blank-interleaved topology, written from scratch.

This module must stay code-independent from the lattice kernel: it builds
the standard 2|l|+1 extended sequence, runs the three-term recursions with
shifted vectors and logaddexp chains, and normalizes with scipy. Agreement
between the two implementations on tau=1 vocabularies is then a meaningful
check rather than a tautology.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import log_softmax as _sp_log_softmax

from .loss import LossGrad
from .vocab import Label

_NINF = -np.inf


def _extended_sequence(units: str, col: dict[str, int]) -> np.ndarray:
    ext = [0]
    for u in units:
        ext.append(col[u])
        ext.append(0)
    return np.array(ext, dtype=np.int64)


def ctc_loss_grad(
    logits: np.ndarray, label: str | Label, base_units: Sequence[str] | str
) -> LossGrad:
    """Vanilla CTC negative log-likelihood and gradient w.r.t. logits.

    Column 0 is blank; column k is base_units[k-1]. The skip transition
    (two steps ahead) is banned into blanks and into a repeat of the same
    unit, exactly the textbook recursion.
    """
    units = str(label)
    base = list(base_units)
    col = {u: k + 1 for k, u in enumerate(base)}
    for u in units:
        if u not in col:
            raise ValueError(f"label unit {u!r} not in base units")

    x = np.asarray(logits, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(base) + 1:
        raise ValueError(
            f"logits must be T x {len(base) + 1}, got {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("logits contain non-finite values")
    T, V = x.shape
    L = len(units)

    if T == 0:
        if L == 0:
            return LossGrad(loss=0.0, grad=np.zeros((0, V)))
        return LossGrad(loss=np.inf, grad=None, impossible=True)

    logp = _sp_log_softmax(x, axis=1)
    ext = _extended_sequence(units, col)
    S = 2 * L + 1
    emit = logp[:, ext]

    # skip s-2 -> s is legal only into a non-blank that differs from ext[s-2]
    skip_ok = np.zeros(S, dtype=bool)
    skip_ok[2:] = (ext[2:] != 0) & (ext[2:] != ext[:-2])

    la = np.full((T, S), _NINF)
    la[0, 0] = emit[0, 0]
    if S > 1:
        la[0, 1] = emit[0, 1]
    for t in range(1, T):
        stay = la[t - 1]
        step = np.concatenate(([_NINF], la[t - 1][:-1]))
        skip = np.full(S, _NINF)
        skip[2:] = la[t - 1][:-2]
        skip[~skip_ok] = _NINF
        la[t] = emit[t] + np.logaddexp(np.logaddexp(stay, step), skip)

    finals = [S - 1] if S == 1 else [S - 1, S - 2]
    ll = float(np.logaddexp.reduce(la[T - 1, finals]))
    if not np.isfinite(ll):
        return LossGrad(loss=np.inf, grad=None, impossible=True)

    lb = np.full((T, S), _NINF)
    for f in finals:
        lb[T - 1, f] = emit[T - 1, f]
    for t in range(T - 2, -1, -1):
        stay = lb[t + 1]
        step = np.concatenate((lb[t + 1][1:], [_NINF]))
        skip = np.full(S, _NINF)
        skip[:-2] = np.where(skip_ok[2:], lb[t + 1][2:], _NINF)
        lb[t] = emit[t] + np.logaddexp(np.logaddexp(stay, step), skip)

    # occupancy per output column, folded over the states that emit it
    occ = np.full((T, V), _NINF)
    ab = la + lb
    for s in range(S):
        k = ext[s]
        occ[:, k] = np.logaddexp(occ[:, k], ab[:, s])
    grad = np.exp(logp) - np.exp(occ - logp - ll)
    return LossGrad(loss=-ll, grad=grad)
