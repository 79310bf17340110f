#!/usr/bin/env python3
"""Regenerate the golden fixtures consumed by the frontend bindings tests.

Inputs (vocab files, logits containers) are synthesized here; every
expected output is produced by invoking the installed ``gramctc`` CLI,
so the fixtures pin the command-line interface, not library internals.

Usage: python3 tools/make_golden.py [out_dir]   (default frontend/golden)
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from gramctc import build_vocab, save_vocab, write_logits

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "frontend" / "golden"


def cli(*args: str) -> dict:
    proc = subprocess.run(["gramctc", *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"gramctc {' '.join(args)} failed:\n{proc.stderr}")
    return json.loads(proc.stdout)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    vocab_ab = build_vocab(["a", "b", "ab"], "ab")
    vocab_the = build_vocab(["t", "h", "e", "th"], "the")
    save_vocab(vocab_ab, OUT / "vocab_ab.txt")
    save_vocab(vocab_the, OUT / "vocab_the.txt")

    rng = np.random.default_rng(2026)
    inputs = {
        "t4_ab": ("vocab_ab.txt", "ab", rng.normal(size=(4, vocab_ab.total_symbols))),
        "t5_aab": ("vocab_ab.txt", "aab", rng.normal(size=(5, vocab_ab.total_symbols))),
        "t3_the": ("vocab_the.txt", "the", rng.normal(size=(3, vocab_the.total_symbols))),
        "t6_thth": ("vocab_the.txt", "thth", rng.normal(size=(6, vocab_the.total_symbols))),
        "t2_empty": ("vocab_ab.txt", "", rng.normal(size=(2, vocab_ab.total_symbols))),
        # one frame cannot carry a three-unit label with tau=2
        "t1_impossible": ("vocab_ab.txt", "aba", np.zeros((1, vocab_ab.total_symbols))),
        "t1_single": ("vocab_ab.txt", "a", rng.normal(size=(1, vocab_ab.total_symbols))),
    }
    # column 0 dominant everywhere: greedy must collapse to the empty label
    blank = np.zeros((3, vocab_ab.total_symbols))
    blank[:, 0] = 10.0
    inputs["t3_allblank"] = ("vocab_ab.txt", "", blank)

    loss_cases = []
    for name, (vocab_file, label, logits) in inputs.items():
        write_logits(OUT / f"{name}.bin", logits)
        args = ["loss", "--vocab", str(OUT / vocab_file), "--label", label]
        case = {"name": name, "vocab": vocab_file, "label": label,
                "logits": f"{name}.bin"}
        if name == "t1_impossible":
            # asking for a gradient here is itself an error, which is the point
            record = cli(*args, str(OUT / f"{name}.bin"))
        else:
            grad_file = f"{name}.grad.bin"
            record = cli(*args, "--grad-out", str(OUT / grad_file),
                         str(OUT / f"{name}.bin"))
            record["grad_file"] = grad_file  # relative, fixtures must be relocatable
            case["grad"] = grad_file
        case["expected"] = record
        loss_cases.append(case)

    decode_cases = []
    for name, mode, extra in [
        ("t4_ab", "greedy", []),
        ("t4_ab", "beam", ["--beam-width", "8", "--n-best", "3"]),
        ("t3_the", "beam", ["--beam-width", "16", "--n-best", "4"]),
        ("t6_thth", "beam", ["--beam-width", "4", "--n-best", "1"]),
        ("t1_single", "greedy", []),
        ("t3_allblank", "greedy", []),
        ("t2_empty", "beam", ["--beam-width", "256", "--n-best", "5"]),
    ]:
        vocab_file = inputs[name][0]
        record = cli("decode", "--vocab", str(OUT / vocab_file), "--mode", mode,
                     *extra, str(OUT / f"{name}.bin"))
        result = record["results"][0]
        result["file"] = f"{name}.bin"  # relative, so fixtures survive checkout moves
        decode_cases.append({"name": f"{name}_{mode}", "vocab": vocab_file,
                             "logits": f"{name}.bin", "mode": mode,
                             "beam_width": int(extra[1]) if extra else None,
                             "n_best": int(extra[3]) if extra else None,
                             "expected": result})

    manifest = {"loss": loss_cases, "decode": decode_cases}
    (OUT / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(loss_cases)} loss and {len(decode_cases)} decode fixtures to {OUT}")


if __name__ == "__main__":
    main()
