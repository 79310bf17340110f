import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gramctc import (
    Label,
    backward,
    build_lattice,
    build_vocab,
    finite_difference_grad,
    forward,
    gram_ctc_loss_grad,
    joint_loss,
    likelihood,
    log_softmax,
)

from conftest import random_instance


def test_log_softmax_uniform_row():
    out = log_softmax(np.zeros((1, 3)))
    assert np.allclose(out, np.log(1 / 3))


def test_log_softmax_huge_scores_no_overflow():
    out = log_softmax(np.array([[1000.0, 0.0, 0.0]]))
    assert np.all(np.isfinite(out))
    assert abs(out[0, 0]) < 1e-9
    assert np.allclose(out[0, 1:], -1000.0)


def test_log_softmax_closed_form():
    out = log_softmax(np.array([[np.log(2.0), 0.0]]))
    assert np.allclose(out, [np.log(2 / 3), np.log(1 / 3)])


def test_forward_single_path():
    v = build_vocab(["a"], "a")
    lat = build_lattice(v, Label("a"))
    lp = log_softmax(np.array([[0.3, 1.2]]))
    la = forward(lat, lp)
    fb = likelihood(lat, lp)
    assert np.isclose(fb.log_likelihood, lp[0, 1])
    # the only finite t=1 entries are the initials
    finite = {(lat.states[k].i, lat.states[k].j) for k in np.flatnonzero(np.isfinite(la[0]))}
    assert finite == {(0, 0), (1, 1)}


def test_forward_three_paths_t2():
    v = build_vocab(["a"], "a")
    lat = build_lattice(v, Label("a"))
    lp = log_softmax(np.random.default_rng(1).normal(size=(2, 2)))
    y = np.exp(lp)
    expected = y[0, 0] * y[1, 1] + y[0, 1] * y[1, 0] + y[0, 1] * y[1, 1]
    assert np.isclose(np.exp(likelihood(lat, lp).log_likelihood), expected)


def test_forward_four_paths_with_bigram(ab_vocab):
    # T=2, label "ab": a,b | -,ab | ab,- | ab,ab
    lat = build_lattice(ab_vocab, Label("ab"))
    lp = log_softmax(np.random.default_rng(2).normal(size=(2, 4)))
    y = np.exp(lp)
    a, b, ab = (ab_vocab.gram_id(s) for s in ("a", "b", "ab"))
    expected = (
        y[0, a] * y[1, b]
        + y[0, 0] * y[1, ab]
        + y[0, ab] * y[1, 0]
        + y[0, ab] * y[1, ab]
    )
    assert np.isclose(np.exp(likelihood(lat, lp).log_likelihood), expected)


def test_backward_t1_mirror():
    v = build_vocab(["a"], "a")
    lat = build_lattice(v, Label("a"))
    lp = log_softmax(np.array([[0.7, -0.2]]))
    lb = backward(lat, lp)
    k = next(k for k, s in enumerate(lat.states) if (s.i, s.j) == (1, 1))
    assert np.isclose(lb[0, k], lp[0, 1])


def test_backward_initials_recover_likelihood(ab_vocab):
    rng = np.random.default_rng(3)
    for _ in range(10):
        label, logits = random_instance(rng, ab_vocab, max_t=5, max_len=3)
        lat = build_lattice(ab_vocab, label)
        lp = log_softmax(logits)
        fb = likelihood(lat, lp)
        from_beta = np.logaddexp.reduce(fb.log_beta[0, lat.initials])
        if fb.impossible:
            assert from_beta == -np.inf
        else:
            assert np.isclose(from_beta, fb.log_likelihood, atol=1e-12)


def test_backward_empty_label_only_blank_path():
    v = build_vocab(["a"], "a")
    lat = build_lattice(v, Label(""))
    lp = log_softmax(np.random.default_rng(4).normal(size=(2, 2)))
    lb = backward(lat, lp)
    assert np.isclose(lb[0, 0], lp[0, 0] + lp[1, 0])


def test_likelihood_forced_blank_between_repeats():
    v = build_vocab(["A"], "A")
    lat = build_lattice(v, Label("AA"))
    lp = log_softmax(np.random.default_rng(5).normal(size=(3, 2)))
    y = np.exp(lp)
    assert np.isclose(np.exp(likelihood(lat, lp).log_likelihood), y[0, 1] * y[1, 0] * y[2, 1])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.integers(1, 6), length=st.integers(0, 3))
def test_eq10_consistency_everywhere(seed, t, length):
    v = build_vocab(["a", "b", "ab"], "ab")
    rng = np.random.default_rng(seed)
    label = Label("".join(rng.choice(["a", "b"], size=length)))
    lp = log_softmax(rng.normal(size=(t, v.total_symbols)))
    fb = likelihood(build_lattice(v, label), lp)
    if not fb.impossible:
        assert fb.consistency_gap <= 1e-9


def test_likelihood_t0():
    v = build_vocab(["a"], "a")
    empty = np.zeros((0, 2))
    assert likelihood(build_lattice(v, Label("")), empty).log_likelihood == 0.0
    assert likelihood(build_lattice(v, Label("a")), empty).log_likelihood == -np.inf


def test_grad_t1_is_softmax_cross_entropy():
    v = build_vocab(["a"], "a")
    x = np.array([[0.4, -1.1]])
    lg = gram_ctc_loss_grad(x, Label("a"), v)
    y = np.exp(log_softmax(x))
    assert np.isclose(lg.loss, -np.log(y[0, 1]))
    onehot = np.array([[0.0, 1.0]])
    assert np.allclose(lg.grad, y - onehot, atol=1e-12)


def test_grad_empty_label_targets_blank():
    v = build_vocab(["a", "b"], "ab")
    x = np.random.default_rng(6).normal(size=(4, 3))
    lg = gram_ctc_loss_grad(x, Label(""), v)
    y = np.exp(log_softmax(x))
    onehot = np.zeros_like(y)
    onehot[:, 0] = 1.0
    assert np.allclose(lg.grad, y - onehot, atol=1e-12)


def test_grad_matches_finite_differences_spec_instance():
    # T=5, |l|=2, |G'|=5
    v = build_vocab(["a", "b", "ab", "aa"], "ab")
    assert v.total_symbols == 5
    rng = np.random.default_rng(7)
    x = rng.normal(size=(5, 5))
    lg = gram_ctc_loss_grad(x, Label("ab"), v)
    fd = finite_difference_grad(x, Label("ab"), v, h=1e-5)
    rel = np.abs(lg.grad - fd) / np.maximum(np.abs(fd), 1e-8)
    assert rel.max() <= 1e-4


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.integers(1, 6), length=st.integers(0, 3))
def test_grad_rows_sum_to_zero(seed, t, length):
    v = build_vocab(["a", "b", "ab"], "ab")
    rng = np.random.default_rng(seed)
    label = Label("".join(rng.choice(["a", "b"], size=length)))
    lg = gram_ctc_loss_grad(rng.normal(size=(t, 4)), label, v)
    if not lg.impossible:
        assert np.abs(lg.grad.sum(axis=1)).max() <= 1e-9
        assert lg.loss >= 0.0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), shift=st.floats(-50, 50))
def test_scale_invariance_per_row(seed, shift):
    v = build_vocab(["a", "b", "ab"], "ab")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(4, 4))
    base = gram_ctc_loss_grad(x, Label("ab"), v).loss
    shifted = gram_ctc_loss_grad(x + shift, Label("ab"), v).loss
    assert abs(base - shifted) <= 1e-10


def test_impossible_alignment_is_structured(ab_vocab):
    x = np.random.default_rng(8).normal(size=(2, 4))
    lg = gram_ctc_loss_grad(x, Label("aaa"), ab_vocab)  # needs >= 3 frames
    assert lg.impossible
    assert lg.loss == np.inf
    assert lg.grad is None


def test_dimension_mismatch_rejected(ab_vocab):
    with pytest.raises(ValueError, match="columns"):
        gram_ctc_loss_grad(np.zeros((3, 7)), Label("a"), ab_vocab)


def test_nonfinite_logits_rejected(ab_vocab):
    x = np.zeros((2, 4))
    x[1, 2] = np.nan
    with pytest.raises(ValueError, match="finite"):
        gram_ctc_loss_grad(x, Label("a"), ab_vocab)


def _term(x, label, vocab):
    return lambda: gram_ctc_loss_grad(x, label, vocab)


def test_joint_weight_one_zero_is_identity(ab_vocab):
    rng = np.random.default_rng(9)
    x1, x2 = rng.normal(size=(2, 3, 4))
    solo = gram_ctc_loss_grad(x1, Label("ab"), ab_vocab)
    j = joint_loss([(_term(x1, Label("ab"), ab_vocab), 1.0),
                    (_term(x2, Label("a"), ab_vocab), 0.0)])
    assert np.isclose(j.loss, solo.loss)
    assert np.allclose(j.grads[0], solo.grad)
    assert np.allclose(j.grads[1], 0.0)


def test_joint_half_half_same_term_linearity(ab_vocab):
    x = np.random.default_rng(10).normal(size=(3, 4))
    solo = gram_ctc_loss_grad(x, Label("ab"), ab_vocab)
    j = joint_loss([(_term(x, Label("ab"), ab_vocab), 0.5),
                    (_term(x, Label("ab"), ab_vocab), 0.5)])
    assert np.isclose(j.loss, solo.loss)
    assert np.allclose(j.combined_grad(), solo.grad)


def test_joint_rejects_mismatched_t(ab_vocab):
    rng = np.random.default_rng(11)
    with pytest.raises(ValueError, match="timestep"):
        joint_loss([(_term(rng.normal(size=(3, 4)), Label("a"), ab_vocab), 0.5),
                    (_term(rng.normal(size=(4, 4)), Label("a"), ab_vocab), 0.5)])


def test_joint_weight_validation(ab_vocab):
    x = np.zeros((2, 4))
    with pytest.raises(ValueError, match=">= 0"):
        joint_loss([(_term(x, Label("a"), ab_vocab), -1.0)])
    with pytest.raises(ValueError, match="> 0"):
        joint_loss([(_term(x, Label("a"), ab_vocab), 0.0)])
    with pytest.raises(ValueError, match="term"):
        joint_loss([])


def test_joint_propagates_impossible(ab_vocab):
    x = np.zeros((2, 4))
    j = joint_loss([(_term(x, Label("ab"), ab_vocab), 0.5),
                    (_term(x, Label("aaa"), ab_vocab), 0.5)])  # needs 5 frames
    assert j.impossible and j.loss == np.inf
    assert j.grads == [None, None]
    with pytest.raises(ValueError, match="no gradient"):
        j.combined_grad()
