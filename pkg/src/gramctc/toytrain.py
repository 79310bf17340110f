"""Desk-scale end-to-end harness: synthetic data, a context-window linear
model, SGD with Nesterov momentum through the loss, and CER evaluation.

The model is deliberately a single linear layer over stacked frames so the
chain rule stays hand-derivable: logits = X W + b, dW = X^T G, db = sum G,
with G the loss gradient w.r.t. the logits. The loss, not the acoustic
model, is the thing under test here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import refctc
from .lattice import Lattice, build_lattice
from .loss import gram_ctc_loss_grad, joint_loss, log_softmax
from .decode import beam_search, greedy_decode
from .vocab import GramVocab, Label


@dataclass(frozen=True)
class SynthConfig:
    base_units: str
    frames_per_unit: int = 4
    feature_dim: int = 8
    noise_sigma: float = 0.3
    num_samples: int = 200
    seed: int = 0
    min_label_len: int = 2
    max_label_len: int = 8

    def __post_init__(self) -> None:
        if self.frames_per_unit < 1:
            raise ValueError("frames_per_unit must be >= 1")
        if self.feature_dim < len(self.base_units):
            raise ValueError("feature_dim must be >= number of base units")
        if not 1 <= self.min_label_len <= self.max_label_len:
            raise ValueError("need 1 <= min_label_len <= max_label_len")


def _prototypes(base_units: Sequence[str] | str, feature_dim: int) -> np.ndarray:
    protos = np.zeros((len(base_units), feature_dim))
    for k in range(len(base_units)):
        protos[k, k] = 1.0
    return protos


def synth_features_for_labels(
    labels: Sequence[Label],
    base_units: Sequence[str] | str,
    frames_per_unit: int,
    feature_dim: int,
    noise_sigma: float,
    seed: int,
) -> list[np.ndarray]:
    """frames_per_unit noisy copies of a one-hot prototype per label unit."""
    units = list(base_units)
    index = {u: k for k, u in enumerate(units)}
    protos = _prototypes(units, feature_dim)
    rng = np.random.default_rng(seed)
    out = []
    for label in labels:
        rows = np.repeat(
            protos[[index[u] for u in label.units]], frames_per_unit, axis=0
        )
        out.append(rows + noise_sigma * rng.standard_normal(rows.shape))
    return out


def synth_dataset(cfg: SynthConfig) -> list[tuple[np.ndarray, Label]]:
    """Random labels (length min..max) with synthetic features, seeded."""
    rng = np.random.default_rng(cfg.seed)
    units = list(cfg.base_units)
    labels = []
    for _ in range(cfg.num_samples):
        length = int(rng.integers(cfg.min_label_len, cfg.max_label_len + 1))
        labels.append(Label("".join(rng.choice(units, size=length))))
    feats = synth_features_for_labels(
        labels,
        cfg.base_units,
        cfg.frames_per_unit,
        cfg.feature_dim,
        cfg.noise_sigma,
        seed=cfg.seed + 1,  # decouple label draws from noise draws
    )
    return list(zip(feats, labels))


def apply_stride(features: np.ndarray, stride: int) -> np.ndarray:
    """Stack stride consecutive frames into one (zero-padding the tail)."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    features = np.asarray(features, dtype=np.float64)
    T, d = features.shape
    if stride == 1:
        return features.copy()
    T_out = -(-T // stride)
    pad = T_out * stride - T
    if pad:
        features = np.vstack([features, np.zeros((pad, d))])
    return features.reshape(T_out, stride * d)


@dataclass
class ToyModel:
    """Linear classifier over a window of stacked frames.

    window is the total width (odd), so (window-1)/2 frames of context on
    each side; weights has shape (window*feature_dim, total_symbols).
    """

    window: int
    weights: np.ndarray
    bias: np.ndarray

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0] // self.window

    @property
    def total_symbols(self) -> int:
        return self.weights.shape[1]


def init_model(
    window: int, feature_dim: int, total_symbols: int, seed: int = 0, scale: float = 0.01
) -> ToyModel:
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and >= 1")
    rng = np.random.default_rng(seed)
    return ToyModel(
        window=window,
        weights=scale * rng.standard_normal((window * feature_dim, total_symbols)),
        bias=np.zeros(total_symbols),
    )


def context_windows(features: np.ndarray, window: int) -> np.ndarray:
    """T x d -> T x (window*d); borders zero-padded."""
    features = np.asarray(features, dtype=np.float64)
    T, d = features.shape
    half = (window - 1) // 2
    padded = np.vstack([np.zeros((half, d)), features, np.zeros((half, d))])
    return np.stack([padded[t : t + window].ravel() for t in range(T)])


def model_logits(model: ToyModel, features: np.ndarray) -> np.ndarray:
    return context_windows(features, model.window) @ model.weights + model.bias


@dataclass
class TrainResult:
    model: ToyModel
    epoch_losses: list[float]
    component_losses: dict[str, list[float]]
    epoch_seconds: list[float]
    skipped_samples: int = 0


def _ctc_columns(vocab: GramVocab) -> list[int]:
    cols = [vocab.blank_id]
    for u in vocab.base_units:
        gid = vocab.gram_id(u)
        assert gid is not None  # build_vocab guarantees C subset of G
        cols.append(gid)
    return cols


def train(
    model: ToyModel,
    dataset: Sequence[tuple[np.ndarray, Label]],
    vocab: GramVocab,
    loss_kind: str = "gram",
    joint_weights: tuple[float, float] = (0.5, 0.5),
    epochs: int = 10,
    learning_rate: float = 1e-3,
    momentum: float = 0.99,
    seed: int = 0,
    stride: int = 1,
) -> TrainResult:
    """Batch-1 SGD with Nesterov momentum; deterministic under seed.

    loss_kind: "gram" (full vocabulary), "ctc" (vanilla, vocab must be
    uni-gram), or "joint" (weighted gram + vanilla terms; the vanilla term
    reads the blank and uni-gram columns of the shared output head).
    Samples whose T is too short for their label are skipped and counted.
    """
    if loss_kind not in ("gram", "ctc", "joint"):
        raise ValueError(f"unknown loss_kind {loss_kind!r}")
    if loss_kind == "ctc" and vocab.tau != 1:
        raise ValueError("ctc loss needs a uni-gram vocabulary")
    if model.total_symbols != vocab.total_symbols:
        raise ValueError(
            f"model emits {model.total_symbols} symbols, vocab has {vocab.total_symbols}"
        )

    rng = np.random.default_rng(seed)
    ctc_cols = _ctc_columns(vocab) if loss_kind == "joint" else None
    lattices: dict[Label, Lattice] = {}
    xs = [context_windows(apply_stride(f, stride), model.window) for f, _ in dataset]
    labels = [label for _, label in dataset]

    vel_w = np.zeros_like(model.weights)
    vel_b = np.zeros_like(model.bias)
    epoch_losses: list[float] = []
    components: dict[str, list[float]] = {
        k: [] for k in (("gram", "ctc") if loss_kind == "joint" else (loss_kind,))
    }
    epoch_seconds: list[float] = []
    skipped = 0

    for epoch in range(epochs):
        started = time.perf_counter()
        total = 0.0
        comp_totals = dict.fromkeys(components, 0.0)
        used = 0
        for n in rng.permutation(len(dataset)):
            X, label = xs[n], labels[n]
            try:
                logits = X @ model.weights + model.bias
                loss_value, grad, comps = _sample_loss_grad(
                    logits, label, vocab, loss_kind, joint_weights, lattices, ctc_cols
                )
            except ValueError as exc:
                raise RuntimeError(
                    f"diverged at epoch {epoch + 1}, sample {n}: {exc}"
                ) from exc
            if grad is None:
                skipped += 1
                continue
            if np.isnan(loss_value):
                raise RuntimeError(
                    f"loss is NaN at epoch {epoch + 1}, sample {n}"
                )
            total += loss_value
            for k, v in comps.items():
                comp_totals[k] += v
            used += 1
            grad_w = X.T @ grad
            grad_b = grad.sum(axis=0)
            vel_w = momentum * vel_w + grad_w
            vel_b = momentum * vel_b + grad_b
            model.weights -= learning_rate * (grad_w + momentum * vel_w)
            model.bias -= learning_rate * (grad_b + momentum * vel_b)
        denom = max(used, 1)
        epoch_losses.append(total / denom)
        for k in components:
            components[k].append(comp_totals[k] / denom)
        epoch_seconds.append(time.perf_counter() - started)

    return TrainResult(
        model=model,
        epoch_losses=epoch_losses,
        component_losses=components,
        epoch_seconds=epoch_seconds,
        skipped_samples=skipped,
    )


def _sample_loss_grad(logits, label, vocab, loss_kind, joint_weights, lattices, ctc_cols):
    if loss_kind != "ctc" and label not in lattices:
        lattices[label] = build_lattice(vocab, label)
    if loss_kind == "gram":
        lg = gram_ctc_loss_grad(logits, label, vocab, lattices[label])
        return lg.loss, lg.grad, {"gram": lg.loss}
    if loss_kind == "ctc":
        lg = refctc.ctc_loss_grad(logits, label, vocab.base_units)
        return lg.loss, lg.grad, {"ctc": lg.loss}
    sub = np.ascontiguousarray(logits[:, ctc_cols])
    result = joint_loss(
        [
            (lambda: gram_ctc_loss_grad(logits, label, vocab, lattices[label]),
             joint_weights[0]),
            (lambda: refctc.ctc_loss_grad(sub, label, vocab.base_units),
             joint_weights[1]),
        ]
    )
    if result.impossible:
        return result.loss, None, {}
    grad = result.grads[0].copy()
    grad[:, ctc_cols] += result.grads[1]
    return (
        result.loss,
        grad,
        {"gram": result.term_losses[0], "ctc": result.term_losses[1]},
    )


def levenshtein(a: str, b: str) -> int:
    """Two-row edit distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ua in enumerate(a, start=1):
        cur = [i]
        for j, ub in enumerate(b, start=1):
            cur.append(
                min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ua != ub))
            )
        prev = cur
    return prev[len(b)]


def evaluate_cer(
    model: ToyModel,
    dataset: Sequence[tuple[np.ndarray, Label]],
    vocab: GramVocab,
    stride: int = 1,
    beam_width: int | None = None,
) -> dict:
    """Decode each sample and average unit-level edit distance over ref length.

    Greedy decoding by default; beam_width switches to the beam decoder,
    whose marginal scoring handles mass split across decompositions.
    """
    edits: list[int] = []
    rates: list[float] = []
    for features, ref in dataset:
        logits = model_logits(model, apply_stride(features, stride))
        if beam_width is None:
            _, hyp = greedy_decode(log_softmax(logits), vocab)
        else:
            (hyp, _), = beam_search(log_softmax(logits), vocab, beam_width, n_best=1)
        d = levenshtein(hyp.units, ref.units)
        edits.append(d)
        rates.append(d / max(1, len(ref)))
    cer = float(np.mean(rates)) if rates else 0.0
    return {"cer": cer, "per_sample_edits": edits}
