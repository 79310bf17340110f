"""The on-disk interfaces: logits containers and the command line.

Anything that cannot import this package talks to it through files and
the gramctc command. The binary logits container is 13 bytes of header
(magic, version, T, V) followed by row-major little-endian float64.
"""

import json
import struct
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from gramctc import build_vocab, read_logits, save_vocab, write_logits

tmp = Path(tempfile.mkdtemp(prefix="gramctc-demo-"))
vocab = build_vocab(["a", "b", "ab"], base_units="ab")
save_vocab(vocab, tmp / "vocab.txt")
print("vocab file:")
print((tmp / "vocab.txt").read_text(), end="")

rng = np.random.default_rng(4)
logits = rng.normal(size=(3, vocab.total_symbols))
write_logits(tmp / "x.bin", logits)

raw = (tmp / "x.bin").read_bytes()
magic, version, T, V = struct.unpack("<4sBII", raw[:13])
print(f"\nbinary container: magic={magic} version={version} T={T} V={V}"
      f" payload={len(raw) - 13} bytes")
assert np.array_equal(read_logits(tmp / "x.bin"), logits)
print("roundtrip exact:", True)

# Same matrix as csv and json; the reader sniffs the format, so extensions
# are only a courtesy.
write_logits(tmp / "x.csv", logits, fmt="csv")
write_logits(tmp / "x.json", logits, fmt="json")
for name in ("x.csv", "x.json"):
    again = read_logits(tmp / name)
    print(f"{name}: max abs diff = {np.abs(again - logits).max():.1e}")

# The CLI wraps the same kernels. Output is deterministic JSON with sorted
# keys, so downstream tooling can compare runs byte for byte.
def cli(*args: str) -> str:
    cmd = [sys.executable, "-m", "gramctc.cli", *args]
    return subprocess.run(cmd, capture_output=True, text=True, check=True).stdout

out = cli("loss", "--vocab", str(tmp / "vocab.txt"), "--label", "ab",
          "--grad-out", str(tmp / "grad.bin"), str(tmp / "x.bin"))
print("\n$ gramctc loss --label ab")
rec = json.loads(out)
for key in ("loss", "log_likelihood", "min_path_length", "consistency_gap"):
    print(f"  {key}: {rec[key]}")

grad = read_logits(tmp / "grad.bin")
print(f"  grad rows sum to: {np.abs(grad.sum(axis=1)).max():.1e}")

out = cli("decode", "--vocab", str(tmp / "vocab.txt"), "--mode", "beam",
          "--beam-width", "8", "--n-best", "3", str(tmp / "x.bin"))
print("\n$ gramctc decode --mode beam --n-best 3")
for hyp in json.loads(out)["results"][0]["n_best"]:
    print(f"  {hyp['label']!r:6s} log p = {hyp['log_prob']:.6f}")
