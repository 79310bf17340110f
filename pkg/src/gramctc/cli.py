"""Batch command line: loss/grad, decoding, oracle checks, gram selection,
synthetic data, toy training.

Structured results go to stdout as JSON with sorted keys so identical
invocations are byte-identical; framewise dumps are plain text. Module
rejections surface as a JSON error record on stderr and a nonzero exit.
Exit code 0 means every requested check passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import formats, gramselect, toytrain
from .decode import beam_search, format_framewise, greedy_decode
from .lattice import build_lattice, lattice_edges, min_path_length
from .loss import finite_difference_grad, gram_ctc_loss_grad, likelihood, log_softmax
from .oracle import brute_force_label_distribution, brute_force_likelihood
from .vocab import (
    GramVocab,
    Label,
    VocabError,
    build_vocab,
    encode_label,
    load_vocab,
    save_vocab,
)


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _load_vocab(args) -> GramVocab:
    if not args.vocab:
        raise ValueError("--vocab is required for this command")
    return load_vocab(args.vocab, base_units=args.units or None)


def _f(value: float):
    """JSON-safe float: inf/nan become strings."""
    if np.isfinite(value):
        return float(value)
    return repr(float(value))


def _parse_top_k(pairs: list[str]) -> dict[int, int]:
    out = {}
    for pair in pairs:
        try:
            length, k = pair.split(":", 1)
            out[int(length)] = int(k)
        except ValueError as exc:
            raise ValueError(f"--top-k wants LEN:K, got {pair!r}") from exc
    return out


def _cmd_loss(args) -> int:
    vocab = _load_vocab(args)
    logits = formats.read_logits(args.logits)
    label = encode_label(vocab, args.label)
    lattice = build_lattice(vocab, label)
    result = gram_ctc_loss_grad(logits, label, vocab, lattice)
    fb = likelihood(lattice, log_softmax(logits))
    record = {
        "consistency_gap": _f(fb.consistency_gap),
        "impossible": result.impossible,
        "label": str(label),
        "log_likelihood": _f(fb.log_likelihood),
        "loss": None if result.impossible else _f(result.loss),
        "min_path_length": min_path_length(lattice),
        "timesteps": int(logits.shape[0]),
    }
    if args.grad_out:
        if result.impossible:
            raise ValueError("impossible alignment: no gradient to write")
        formats.write_logits(args.grad_out, result.grad, fmt=args.format)
        record["grad_file"] = args.grad_out
    if args.dump_lattice:
        Path(args.dump_lattice).write_text(
            "\n".join(lattice_edges(lattice, vocab)) + "\n", encoding="utf-8"
        )
        record["lattice_file"] = args.dump_lattice
    _emit(record)
    return 0


def _cmd_grad_check(args) -> int:
    vocab = _load_vocab(args)
    logits = formats.read_logits(args.logits)
    label = encode_label(vocab, args.label)
    tolerance = args.tolerance if args.tolerance is not None else 1e-4
    analytic = gram_ctc_loss_grad(logits, label, vocab)
    if analytic.impossible:
        raise ValueError("impossible alignment: nothing to check")
    numeric = finite_difference_grad(logits, label, vocab, h=args.h)
    abs_err = np.abs(analytic.grad - numeric)
    rel_err = abs_err / np.maximum(np.abs(numeric), 1e-8)
    ok = bool(np.max(rel_err) <= tolerance)
    _emit(
        {
            "h": args.h,
            "max_abs_err": _f(float(np.max(abs_err))),
            "max_rel_err": _f(float(np.max(rel_err))),
            "pass": ok,
            "tolerance": tolerance,
        }
    )
    return 0 if ok else 1


def _decode_one(path: str, vocab: GramVocab, args):
    log_post = log_softmax(formats.read_logits(path))
    if args.mode == "greedy":
        ids, label = greedy_decode(log_post, vocab)
        return {
            "file": path,
            "framewise": format_framewise(ids, vocab),
            "label": str(label),
        }
    hyps = beam_search(log_post, vocab, args.beam_width, args.n_best)
    return {
        "file": path,
        "n_best": [
            {"label": str(label), "log_prob": _f(score)} for label, score in hyps
        ],
    }


def _cmd_decode(args) -> int:
    vocab = _load_vocab(args)
    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        results = list(pool.map(lambda p: _decode_one(p, vocab, args), args.logits))
    if args.dump_framewise:
        if args.mode != "greedy":
            raise ValueError("--dump-framewise needs greedy mode")
        for rec in results:
            print(rec["framewise"])
        return 0
    _emit({"results": results})
    return 0


def _random_instance(rng, max_t: int):
    """Small random vocab/label/logits for the oracle checks."""
    vocab = build_vocab(["a", "b", "ab"], "ab")
    T = int(rng.integers(1, max_t + 1))
    length = int(rng.integers(0, 4))
    label = Label("".join(rng.choice(["a", "b"], size=length)))
    logits = rng.normal(size=(T, vocab.total_symbols))
    return vocab, label, logits


def _cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    tolerance = args.tolerance if args.tolerance is not None else 1e-9
    worst = 0.0
    for _ in range(args.trials):
        vocab, label, logits = _random_instance(rng, args.max_T)
        lattice = build_lattice(vocab, label)
        log_post = log_softmax(logits)
        dp = np.exp(likelihood(lattice, log_post).log_likelihood)
        bf = brute_force_likelihood(np.exp(log_post), label, vocab)
        err = abs(dp - bf) / bf if bf > 0 else abs(dp - bf)
        worst = max(worst, err)
    ok = worst <= tolerance
    print(
        f"{'PASS' if ok else 'FAIL'}, max rel err = {worst:.3e} "
        f"(tolerance {tolerance:.0e}, trials {args.trials})"
    )
    return 0 if ok else 1


def _cmd_normalize_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    tolerance = args.tolerance if args.tolerance is not None else 1e-9
    worst = 0.0
    for _ in range(args.trials):
        vocab, _, logits = _random_instance(rng, args.max_T)
        log_post = log_softmax(logits)
        dist = brute_force_label_distribution(np.exp(log_post), vocab)
        total = 0.0
        for text in dist:
            lattice = build_lattice(vocab, Label(text))
            total += np.exp(likelihood(lattice, log_post).log_likelihood)
        worst = max(worst, abs(total - 1.0))
    ok = worst <= tolerance
    print(
        f"{'PASS' if ok else 'FAIL'}, max |sum-1| = {worst:.3e} "
        f"(tolerance {tolerance:.0e}, trials {args.trials})"
    )
    return 0 if ok else 1


def _cmd_gram_count(args) -> int:
    if not args.units:
        raise ValueError("--units is required")

    def count_file(path: str) -> gramselect.GramStats:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return gramselect.count_corpus_grams(lines, args.max_len, args.units)

    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        shards = list(pool.map(count_file, args.corpus))
    merged: dict[str, int] = {}
    skipped = 0
    for stats in shards:
        skipped += stats.skipped_units
        for gram, count in stats.counts.items():
            merged[gram] = merged.get(gram, 0) + count
    stats = gramselect.GramStats(
        counts=merged, source=gramselect.CORPUS_FREQUENCY, skipped_units=skipped
    )
    if args.out:
        gramselect.write_stats(stats, args.out)
    else:
        rows = sorted(stats.counts.items(), key=lambda gc: (-gc[1], gc[0]))
        for gram, count in rows:
            print(f"{count}\t{gram}")
    return 0


def _cmd_gram_filter(args) -> int:
    if not args.units:
        raise ValueError("--units is required")
    stats = gramselect.read_stats(args.stats)
    strings = gramselect.filter_grams(
        stats,
        args.units,
        min_count=args.min_count,
        top_k_per_length=_parse_top_k(args.top_k) if args.top_k else None,
    )
    vocab = build_vocab(strings, args.units)
    save_vocab(vocab, args.out)
    _emit({"grams": len(vocab.grams), "out": args.out, "tau": vocab.tau})
    return 0


def _cmd_gram_refine(args) -> int:
    if not args.units:
        raise ValueError("--units is required")
    lines: list[str] = []
    for path in args.corpus:
        lines.extend(Path(path).read_text(encoding="utf-8").splitlines())
    initial_policy = {"min_count": args.initial_min_count}
    if args.initial_top_k:
        initial_policy["top_k_per_length"] = _parse_top_k(args.initial_top_k)
    refine_policy = None if args.keep_all else {"min_count": args.refine_min_count}
    train_config = {
        "frames_per_unit": args.frames_per_unit,
        "feature_dim": args.feature_dim,
        "noise_sigma": args.noise,
        "seed": args.seed,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "momentum": args.momentum,
        "window": args.window,
        "stride": args.stride,
    }
    vocab, report = gramselect.refine_pipeline(
        lines, args.max_len, initial_policy, train_config, refine_policy, args.units
    )
    save_vocab(vocab, args.out)
    _emit(
        {
            "dropped": report.dropped,
            "final_grams": report.final_grams,
            "initial_grams": report.initial_grams,
            "out": args.out,
            "skipped_units": report.corpus_skipped_units,
        }
    )
    return 0


def _cmd_synth(args) -> int:
    if not args.units:
        raise ValueError("--units is required")
    cfg = toytrain.SynthConfig(
        base_units=args.units,
        frames_per_unit=args.frames_per_unit,
        feature_dim=args.feature_dim,
        noise_sigma=args.noise,
        num_samples=args.samples,
        seed=args.seed,
        min_label_len=args.min_len,
        max_label_len=args.max_len,
    )
    formats.write_dataset(args.out, toytrain.synth_dataset(cfg))
    _emit({"out": args.out, "samples": args.samples})
    return 0


def _load_model(path: str) -> toytrain.ToyModel:
    data = np.load(path)
    return toytrain.ToyModel(
        window=int(data["window"]),
        weights=np.asarray(data["weights"], dtype=np.float64),
        bias=np.asarray(data["bias"], dtype=np.float64),
    )


def _cmd_train_toy(args) -> int:
    vocab = _load_vocab(args)
    dataset = formats.read_dataset(args.dataset)
    if not dataset:
        raise ValueError(f"{args.dataset}: empty dataset")
    feature_dim = dataset[0][0].shape[1] * args.stride
    model = toytrain.init_model(
        window=args.window,
        feature_dim=feature_dim,
        total_symbols=vocab.total_symbols,
        seed=args.seed,
    )
    weights = tuple(float(w) for w in args.joint_weights.split(","))
    result = toytrain.train(
        model,
        dataset,
        vocab,
        loss_kind=args.loss,
        joint_weights=weights,
        epochs=args.epochs,
        learning_rate=args.lr,
        momentum=args.momentum,
        seed=args.seed,
        stride=args.stride,
    )
    if args.history_out:
        formats.write_history(args.history_out, result.epoch_losses)
    if args.model_out:
        np.savez(
            args.model_out,
            weights=result.model.weights,
            bias=result.model.bias,
            window=result.model.window,
        )
    _emit(
        {
            "epoch_losses": [_f(v) for v in result.epoch_losses],
            "final_loss": _f(result.epoch_losses[-1]) if result.epoch_losses else None,
            "skipped_samples": result.skipped_samples,
        }
    )
    return 0


def _cmd_eval(args) -> int:
    vocab = _load_vocab(args)
    dataset = formats.read_dataset(args.dataset)
    model = _load_model(args.model)
    result = toytrain.evaluate_cer(
        model, dataset, vocab, stride=args.stride, beam_width=args.beam_width
    )
    _emit({"cer": _f(result["cer"]), "samples": len(dataset)})
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--vocab", help="vocab file (one gram per line)")
    common.add_argument("--units", help="base units as one string")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["binary", "csv", "json"], default="binary")
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--jobs", type=int, default=1)

    parser = argparse.ArgumentParser(prog="gramctc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("loss", parents=[common], help="loss of a logits file")
    p.add_argument("logits")
    p.add_argument("--label", required=True)
    p.add_argument("--grad-out")
    p.add_argument("--dump-lattice")
    p.set_defaults(fn=_cmd_loss)

    p = sub.add_parser("grad-check", parents=[common], help="finite-difference report")
    p.add_argument("logits")
    p.add_argument("--label", required=True)
    p.add_argument("--h", type=float, default=1e-5)
    p.set_defaults(fn=_cmd_grad_check)

    p = sub.add_parser("decode", parents=[common], help="greedy or beam decoding")
    p.add_argument("logits", nargs="+")
    p.add_argument("--mode", choices=["greedy", "beam"], default="greedy")
    p.add_argument("--beam-width", type=int, default=8)
    p.add_argument("--n-best", type=int, default=1)
    p.add_argument("--dump-framewise", action="store_true")
    p.set_defaults(fn=_cmd_decode)

    p = sub.add_parser("oracle-check", parents=[common], help="DP vs brute force")
    p.add_argument("--max-T", type=int, default=4, dest="max_T")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(fn=_cmd_oracle_check)

    p = sub.add_parser(
        "normalize-check", parents=[common], help="label mass sums to one"
    )
    p.add_argument("--max-T", type=int, default=3, dest="max_T")
    p.add_argument("--trials", type=int, default=10)
    p.set_defaults(fn=_cmd_normalize_check)

    p = sub.add_parser("gram-count", parents=[common], help="count corpus substrings")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--max-len", type=int, default=2)
    p.add_argument("-o", "--out")
    p.set_defaults(fn=_cmd_gram_count)

    p = sub.add_parser("gram-filter", parents=[common], help="stats -> vocab file")
    p.add_argument("stats")
    p.add_argument("--min-count", type=float, default=None)
    p.add_argument("--top-k", action="append", metavar="LEN:K")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(fn=_cmd_gram_filter)

    p = sub.add_parser("gram-refine", parents=[common], help="full selection pipeline")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--max-len", type=int, default=2)
    p.add_argument("--initial-min-count", type=float, default=2)
    p.add_argument("--initial-top-k", action="append", metavar="LEN:K")
    p.add_argument("--refine-min-count", type=float, default=1)
    p.add_argument("--keep-all", action="store_true")
    p.add_argument("--frames-per-unit", type=int, default=1)
    p.add_argument("--feature-dim", type=int, default=8)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--momentum", type=float, default=0.99)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(fn=_cmd_gram_refine)

    p = sub.add_parser("synth", parents=[common], help="synthetic dataset")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--frames-per-unit", type=int, default=4)
    p.add_argument("--feature-dim", type=int, default=8)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--min-len", type=int, default=2)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("train-toy", parents=[common], help="train the linear model")
    p.add_argument("dataset")
    p.add_argument("--loss", choices=["gram", "ctc", "joint"], default="gram")
    p.add_argument("--joint-weights", default="0.5,0.5")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--momentum", type=float, default=0.99)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--history-out")
    p.add_argument("--model-out")
    p.set_defaults(fn=_cmd_train_toy)

    p = sub.add_parser("eval", parents=[common], help="CER of a trained model")
    p.add_argument("dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--beam-width", type=int, default=None)
    p.set_defaults(fn=_cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (VocabError, ValueError, OSError, RuntimeError) as exc:
        record = {"error": {"message": str(exc), "type": type(exc).__name__}}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
