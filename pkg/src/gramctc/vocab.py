"""Gram vocabularies: base units, gram indexing, and label encoding."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

BLANK_ID = 0
UNITS_HEADER = "#units:"


class VocabError(ValueError):
    """A gram set or label violates the vocabulary rules."""


@dataclass(frozen=True)
class Gram:
    """A contiguous run of base units treated as a single output symbol."""

    units: str
    id: int


@dataclass(frozen=True)
class Label:
    """A target sequence over base units."""

    units: str

    def __len__(self) -> int:
        return len(self.units)

    def __str__(self) -> str:
        return self.units


@dataclass(frozen=True)
class GramVocab:
    """Output alphabet: blank at index 0 plus grams indexed 1..|G|.

    Every base unit is itself a gram (auto-appended when missing), so every
    label over the base units has at least one decomposition into grams.
    """

    base_units: tuple[str, ...]
    grams: tuple[Gram, ...]
    tau: int
    auto_added: tuple[str, ...] = ()
    blank_id: int = BLANK_ID

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_id_by_string", {g.units: g.id for g in self.grams}
        )

    @property
    def total_symbols(self) -> int:
        """Number of output columns: |G| + 1 for blank."""
        return len(self.grams) + 1

    def gram_id(self, units: str) -> int | None:
        return self._id_by_string.get(units)

    def gram_string(self, gram_id: int) -> str:
        if gram_id == self.blank_id:
            raise VocabError("blank (id 0) has no gram string")
        return self.grams[gram_id - 1].units

    def __contains__(self, units: str) -> bool:
        return units in self._id_by_string


def build_vocab(
    gram_strings: Sequence[str], base_units: Sequence[str] | str
) -> GramVocab:
    """Build a vocabulary from gram strings over an ordered base-unit set.

    Grams are indexed 1..|G| in the given order. Base units missing from
    ``gram_strings`` are appended at the end (in base-unit order) so that
    every unit remains reachable as a length-1 gram; the appended strings
    are recorded in ``auto_added``.
    """
    units = tuple(base_units)
    if not units:
        raise VocabError("base unit set must be non-empty")
    seen_units = set()
    for u in units:
        if len(u) != 1:
            raise VocabError(f"base unit {u!r} is not a single code point")
        if u in seen_units:
            raise VocabError(f"duplicate base unit {u!r}")
        seen_units.add(u)

    if not gram_strings:
        raise VocabError("gram list must be non-empty")
    strings: list[str] = []
    seen = set()
    for s in gram_strings:
        if not s:
            raise VocabError("empty gram string")
        if s in seen:
            raise VocabError(f"duplicate gram {s!r}")
        for u in s:
            if u not in seen_units:
                raise VocabError(f"gram {s!r} uses unit {u!r} outside the base set")
        seen.add(s)
        strings.append(s)

    added = tuple(u for u in units if u not in seen)
    strings.extend(added)
    grams = tuple(Gram(units=s, id=k + 1) for k, s in enumerate(strings))
    tau = max(len(s) for s in strings)
    return GramVocab(base_units=units, grams=grams, tau=tau, auto_added=added)


def encode_label(vocab: GramVocab, text: str) -> Label:
    """Validate ``text`` against the base units and wrap it as a Label."""
    base = set(vocab.base_units)
    for pos, u in enumerate(text, start=1):
        if u not in base:
            raise VocabError(f"unit {u!r} at position {pos} is not a base unit")
    return Label(units=text)


def suffix_grams(
    vocab: GramVocab, label: Label, i: int
) -> list[tuple[int, int]]:
    """All grams of the vocabulary ending at label position ``i`` (1-based).

    Returns (j, gram_id) pairs sorted ascending by gram length j, where the
    gram is the label substring covering positions i-j+1..i. Never empty for
    a valid label because every base unit is a length-1 gram.
    """
    if not 1 <= i <= len(label):
        raise ValueError(f"position {i} outside 1..{len(label)}")
    out: list[tuple[int, int]] = []
    for j in range(1, min(vocab.tau, i) + 1):
        gid = vocab.gram_id(label.units[i - j : i])
        if gid is not None:
            out.append((j, gid))
    return out


def save_vocab(vocab: GramVocab, path: str | Path) -> None:
    """Write one gram per line; line order defines ids 1..|G|, blank implicit."""
    lines = [UNITS_HEADER + " " + "".join(vocab.base_units)]
    lines.extend(g.units for g in vocab.grams)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_vocab(
    path: str | Path, base_units: Sequence[str] | str | None = None
) -> GramVocab:
    """Read a vocab file (optional ``#units:`` header on line 1).

    Without a header or explicit ``base_units``, the base set is inferred as
    the distinct units of the gram strings in order of first appearance.
    """
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    first_data_line = 1
    if raw and raw[0].startswith(UNITS_HEADER):
        header = raw[0][len(UNITS_HEADER) :].strip()
        if base_units is None:
            base_units = header
        raw = raw[1:]
        first_data_line = 2
    while raw and raw[-1] == "":
        raw.pop()
    grams = []
    for n, line in enumerate(raw, start=first_data_line):
        if line == "":
            raise VocabError(f"empty gram at line {n}")
        grams.append(line)
    if base_units is None:
        ordered: list[str] = []
        for s in grams:
            for u in s:
                if u not in ordered:
                    ordered.append(u)
        base_units = ordered
    return build_vocab(grams, base_units)


def unigram_vocab(base_units: Sequence[str] | str) -> GramVocab:
    """The classic-CTC vocabulary: exactly the base units, tau = 1."""
    return build_vocab(list(base_units), base_units)
