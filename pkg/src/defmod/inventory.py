"""Sense inventory: word -> ordered senses with definitions and relations.

Two interchange formats are supported:

* TSV with columns ``word  pos  definition  usage_example  synonyms  hypernyms``
  (trailing columns optional, synonym/hypernym lists ``|``-separated)
* JSON-Lines objects with the same field names, list-valued relations.

Sense order is file order; duplicate (word, definition) rows collapse to
the first occurrence, so a word's sense count equals its number of
distinct definitions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import jsonl

TSV_COLUMNS = ("word", "pos", "definition", "usage_example", "synonyms", "hypernyms")


class InventoryError(ValueError):
    """Malformed or empty inventory input."""


@dataclass(frozen=True)
class Sense:
    definition: str
    usage_example: str | None = None
    pos: str | None = None
    synonyms: tuple[str, ...] = ()
    hypernyms: tuple[str, ...] = ()


@dataclass(frozen=True)
class SenseInventory:
    """Immutable word -> senses mapping; keys are lowercase."""

    entries: dict[str, tuple[Sense, ...]]
    source_name: str = ""

    def lookup(self, word: str) -> tuple[Sense, ...]:
        return self.entries.get(word.lower(), ())

    def words(self) -> list[str]:
        return sorted(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _finish(
    rows: list[tuple[str, Sense]], source_name: str, drop_words: frozenset[str]
) -> SenseInventory:
    entries: dict[str, list[Sense]] = {}
    seen: set[tuple[str, str]] = set()
    for word, sense in rows:
        if word in drop_words:
            continue
        key = (word, sense.definition)
        if key in seen:
            continue
        seen.add(key)
        entries.setdefault(word, []).append(sense)
    if not entries:
        raise InventoryError(f"{source_name}: empty inventory")
    return SenseInventory(
        entries={w: tuple(senses) for w, senses in entries.items()},
        source_name=source_name,
    )


def _parse_tsv_row(line: str, lineno: int, path: str) -> tuple[str, Sense]:
    cols = line.rstrip("\n").split("\t")
    if len(cols) < 3:
        raise InventoryError(
            f"{path}: line {lineno}: expected at least 3 tab-separated columns "
            f"(word, pos, definition), got {len(cols)}"
        )
    cols += [""] * (len(TSV_COLUMNS) - len(cols))
    word, pos, definition, usage, syns, hyps = (c.strip() for c in cols[:6])
    if not word:
        raise InventoryError(f"{path}: line {lineno}: empty word")
    if not definition:
        raise InventoryError(f"{path}: line {lineno}: empty definition")
    return word.lower(), Sense(
        definition=definition,
        usage_example=usage or None,
        pos=pos or None,
        synonyms=tuple(s for s in syns.split("|") if s) if syns else (),
        hypernyms=tuple(h for h in hyps.split("|") if h) if hyps else (),
    )


def _parse_json_row(row: dict, lineno: int, path: str) -> tuple[str, Sense]:
    word = str(row.get("word", "")).strip()
    definition = str(row.get("definition", "")).strip()
    if not word:
        raise InventoryError(f"{path}: line {lineno}: missing word")
    if not definition:
        raise InventoryError(f"{path}: line {lineno}: missing definition")
    usage = row.get("usage_example")
    pos = row.get("pos")
    return word.lower(), Sense(
        definition=definition,
        usage_example=str(usage) if usage else None,
        pos=str(pos) if pos else None,
        synonyms=tuple(str(s) for s in row.get("synonyms", []) if s),
        hypernyms=tuple(str(h) for h in row.get("hypernyms", []) if h),
    )


def infer_format(path: str | Path) -> str:
    return "jsonl" if str(path).endswith((".jsonl", ".json")) else "tsv"


def load_inventory(
    path: str | Path,
    format: str | None = None,
    drop_words: frozenset[str] = frozenset(),
) -> SenseInventory:
    """Load a TSV or JSON-Lines inventory; raises InventoryError with a
    line number on malformed rows and on an inventory with no entries."""
    path = Path(path)
    fmt = format or infer_format(path)
    rows: list[tuple[str, Sense]] = []
    if fmt == "tsv":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                rows.append(_parse_tsv_row(line, lineno, str(path)))
    elif fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except ValueError as exc:
                    raise InventoryError(
                        f"{path}: line {lineno}: invalid JSON ({exc})"
                    ) from exc
                if not isinstance(obj, dict):
                    raise InventoryError(f"{path}: line {lineno}: expected an object")
                rows.append(_parse_json_row(obj, lineno, str(path)))
    else:
        raise ValueError(f"unknown inventory format {fmt!r}")
    drop = frozenset(w.lower() for w in drop_words)
    return _finish(rows, str(path), drop)


def load_drop_list(path: str | Path) -> frozenset[str]:
    """One word per line; blank lines and #-comments ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                words.add(word)
    return frozenset(words)


def save_inventory(inv: SenseInventory, path: str | Path, format: str | None = None) -> None:
    """Write an inventory back out; round-trips through load_inventory."""
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt == "tsv":
        with open(path, "w", encoding="utf-8") as fh:
            for word in sorted(inv.entries):
                for s in inv.entries[word]:
                    fields = (
                        word, s.pos or "", s.definition, s.usage_example or "",
                        "|".join(s.synonyms), "|".join(s.hypernyms),
                    )
                    for f in fields:
                        if "\t" in f or "\n" in f:
                            raise InventoryError(
                                f"field for {word!r} contains a tab/newline; "
                                "use the jsonl format"
                            )
                    fh.write("\t".join(fields) + "\n")
    elif fmt == "jsonl":
        jsonl.write_jsonl(
            path,
            (
                {
                    "word": word,
                    "pos": s.pos,
                    "definition": s.definition,
                    "usage_example": s.usage_example,
                    "synonyms": list(s.synonyms),
                    "hypernyms": list(s.hypernyms),
                }
                for word in sorted(inv.entries)
                for s in inv.entries[word]
            ),
        )
    else:
        raise ValueError(f"unknown inventory format {fmt!r}")
