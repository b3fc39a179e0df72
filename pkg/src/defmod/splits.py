"""Novel-sense holdout splits and conversions between the single- and
grouped-definition formats, including the prediction concatenation used to
score per-context systems on grouped references.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .builder import SEP_JOIN, MdmEntry, SdmEntry, derive_seed


class AlignmentError(ValueError):
    """Predictions do not line up with the reference entries."""

    def __init__(self, message: str, keys: list[str]):
        super().__init__(message)
        self.keys = keys


@dataclass(frozen=True)
class HoldoutSplit:
    """Sense-level train/test partition: each test word loses exactly ``d``
    senses (with all their contexts) and keeps at least one in train."""

    train: tuple[SdmEntry, ...]
    test: tuple[SdmEntry, ...]
    d: int
    seed: int
    held_out: dict[str, tuple[int, ...]]


def build_del(sdm: Sequence[SdmEntry], d: int, seed: int = 0) -> HoldoutSplit:
    """Hold out ``d`` senses per eligible word.

    A word is eligible when it has more than ``d`` distinct senses; the
    held-out sense indices are sampled uniformly by the word's derived
    generator and every entry carrying one of them moves to test.  Words
    with at most ``d`` senses stay entirely in train, so a test word always
    retains at least one training sense.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    senses_by_word: dict[str, set[int]] = {}
    for entry in sdm:
        senses_by_word.setdefault(entry.word, set()).add(entry.sense_index)

    held_out: dict[str, tuple[int, ...]] = {}
    for word in sorted(senses_by_word):
        senses = senses_by_word[word]
        if len(senses) > d:
            rng = random.Random(derive_seed(seed, word))
            held_out[word] = tuple(sorted(rng.sample(sorted(senses), d)))

    train = []
    test = []
    for entry in sdm:
        if entry.sense_index in held_out.get(entry.word, ()):
            test.append(entry)
        else:
            train.append(entry)
    return HoldoutSplit(
        train=tuple(train), test=tuple(test), d=d, seed=seed, held_out=held_out
    )


def ungroup(mdm: Sequence[MdmEntry]) -> list[SdmEntry]:
    """Flatten aligned entries into one row per (context, definition) pair."""
    out = []
    for entry in mdm:
        if not entry.aligned:
            raise ValueError(f"cannot ungroup unaligned entry for {entry.word!r}")
        for i, (ctx, definition) in enumerate(zip(entry.contexts, entry.definitions)):
            out.append(
                SdmEntry(
                    word=entry.word,
                    context=ctx,
                    definition=definition,
                    sense_index=i,
                )
            )
    return out


def group_predictions(
    preds: Sequence[tuple[str, int, str]],
    reference_order: Sequence[MdmEntry],
) -> list[tuple[str, str]]:
    """Concatenate per-context predictions into one string per word.

    ``preds`` are (word, context_index, prediction) rows; for each entry in
    ``reference_order`` the predictions for slots 0..N-1 are joined with
    " <sep> " in context order, so per-context systems are scored on the
    same granularity as grouped ones.  A missing, duplicate, or unmatched
    slot raises AlignmentError naming the offending keys.
    """
    words = [e.word for e in reference_order]
    if len(set(words)) != len(words):
        dupes = sorted({w for w in words if words.count(w) > 1})
        raise AlignmentError(f"duplicate reference words: {dupes}", dupes)
    slots_needed = {e.word: len(e.contexts) for e in reference_order}

    filled: dict[tuple[str, int], str] = {}
    problems: list[str] = []
    for word, idx, prediction in preds:
        key = (word, idx)
        if word not in slots_needed or idx < 0 or idx >= slots_needed[word]:
            problems.append(f"unexpected slot {word}[{idx}]")
        elif key in filled:
            problems.append(f"duplicate prediction for {word}[{idx}]")
        else:
            filled[key] = prediction
    for entry in reference_order:
        for i in range(len(entry.contexts)):
            if (entry.word, i) not in filled:
                problems.append(f"missing prediction for {entry.word}[{i}]")
    if problems:
        raise AlignmentError(
            "prediction/reference mismatch: " + "; ".join(sorted(problems)),
            sorted(problems),
        )

    return [
        (
            entry.word,
            SEP_JOIN.join(filled[(entry.word, i)] for i in range(len(entry.contexts))),
        )
        for entry in reference_order
    ]


def group_references(reference_order: Sequence[MdmEntry]) -> list[tuple[str, str]]:
    """Gold-side counterpart of group_predictions: definitions joined with
    " <sep> " per entry, in the same word order."""
    return [(e.word, SEP_JOIN.join(e.definitions)) for e in reference_order]
