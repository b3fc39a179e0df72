"""Dataset construction: unaligned corpus-backed entries (wordwiki-style),
aligned easy entries grouped from single-definition rows, and model-ready
source/target formatting.

All sampling is driven by per-word generators derived from
``derive_seed(seed, word)`` (sha256 into MT19937), so per-word work can be
parallelized or reordered without changing the output; the scheme is
recorded in dataset manifests as ``sha256-mt19937-v1``.
"""

from __future__ import annotations

import hashlib
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import CorpusIndex, tokenize
from .inventory import SenseInventory

SEP = "<sep>"
SEP_JOIN = " <sep> "
PRNG_NAME = "sha256-mt19937-v1"

DEFAULT_TOKEN_BUDGET = 480
MIN_TOKEN_BUDGET = 16


def derive_seed(seed: int, key: str) -> int:
    digest = hashlib.sha256(f"{seed}\x1f{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def escape_sep(text: str) -> str:
    """Escape literal "<sep>" so joined fields split back unambiguously."""
    return text.replace("<sep/", "<sep//").replace("<sep>", "<sep/>")


def unescape_sep(text: str) -> str:
    return text.replace("<sep/>", "<sep>").replace("<sep//", "<sep/")


def join_with_sep(parts: Sequence[str]) -> str:
    return SEP_JOIN.join(escape_sep(p) for p in parts)


def split_on_sep(text: str) -> list[str]:
    return [unescape_sep(p) for p in text.split(SEP_JOIN)]


@dataclass(frozen=True)
class SdmEntry:
    """One aligned (context, definition) pair for a word.

    ``sense_index`` is the sense's position within the word's inventory
    entry.  Unless ``context_unchecked`` is set (imported third-party
    rows), the context must contain the word as a token.
    """

    word: str
    context: str
    definition: str
    sense_index: int
    pos: str | None = None
    context_unchecked: bool = False

    def validate(self) -> None:
        if not self.context_unchecked and self.word.lower() not in tokenize(self.context):
            raise ValueError(
                f"context for {self.word!r} does not contain the word as a token"
            )


@dataclass(frozen=True)
class MdmEntry:
    """A word with its grouped contexts and gold definitions.

    ``aligned`` entries pair contexts[i] with definitions[i] (so the two
    lists have equal length); unaligned entries carry no correspondence.
    """

    word: str
    contexts: tuple[str, ...]
    definitions: tuple[str, ...]
    aligned: bool

    def __post_init__(self) -> None:
        if not self.contexts or not self.definitions:
            raise ValueError(f"entry for {self.word!r} needs contexts and definitions")
        if self.aligned and len(self.contexts) != len(self.definitions):
            raise ValueError(
                f"aligned entry for {self.word!r} has {len(self.contexts)} contexts "
                f"but {len(self.definitions)} definitions"
            )


@dataclass(frozen=True)
class ModelExample:
    """Formatted source/target strings plus optional auxiliary targets."""

    word: str
    source: str
    target: str
    aux_word: str | None = None
    aux_synonyms: str | None = None
    aux_hypernyms: str | None = None


def _fit_to_budget(contexts: list[str], word: str, budget: int) -> list[str]:
    """Greedy truncation: whole contexts are dropped from the end, then the
    boundary context is token-truncated into the remaining budget.  At
    least one context survives, and every kept context still contains the
    word (a truncated first context extends through its first occurrence
    even if that overruns the budget)."""
    kept: list[str] = []
    used = 0
    for ctx in contexts:
        toks = ctx.split()
        sep_cost = 1 if kept else 0
        if used + sep_cost + len(toks) <= budget:
            kept.append(ctx)
            used += sep_cost + len(toks)
            continue
        room = budget - used - sep_cost
        prefix = toks[: max(room, 0)]
        if word not in prefix:
            if kept:
                break
            cut = toks.index(word) + 1 if word in toks else max(room, 1)
            prefix = toks[:cut]
        kept.append(" ".join(prefix))
        break
    return kept


def _build_one(
    word: str,
    definitions: tuple[str, ...],
    candidate_ids: tuple[int, ...],
    context_tokens: tuple[tuple[str, ...], ...],
    k: int,
    token_budget: int,
    seed: int,
) -> MdmEntry:
    n = min(len(definitions) + k, len(candidate_ids))
    rng = random.Random(derive_seed(seed, word))
    # candidate_ids are ascending, so sorted positions == ascending sentence id
    picked = sorted(rng.sample(range(len(candidate_ids)), n))
    contexts = [" ".join(context_tokens[i]) for i in picked]
    contexts = _fit_to_budget(contexts, word, token_budget)
    return MdmEntry(
        word=word,
        contexts=tuple(contexts),
        definitions=definitions,
        aligned=False,
    )


def _build_batch(args: list[tuple]) -> list[MdmEntry]:
    return [_build_one(*a) for a in args]


def build_wordwiki(
    index: CorpusIndex,
    inv: SenseInventory,
    k: int = 0,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    seed: int = 0,
    jobs: int = 1,
) -> list[MdmEntry]:
    """Build unaligned entries for every word in both index and inventory.

    For a word with M distinct definitions the target context count is
    N = M + k; when fewer sentences contain the word, all of them are
    used.  Contexts are sampled uniformly without replacement by the
    word's derived generator, reordered by ascending sentence id, rendered
    as space-joined lowercase tokens, and truncated to ``token_budget``
    whitespace tokens (separators included).  Output is sorted by word;
    inventory-only words are skipped.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if token_budget < MIN_TOKEN_BUDGET:
        raise ValueError(f"token_budget must be >= {MIN_TOKEN_BUDGET}, got {token_budget}")
    words = sorted(set(index.postings) & set(inv.entries))
    tasks = []
    for word in words:
        senses = inv.lookup(word)
        ids = index.postings[word]
        tasks.append((
            word,
            tuple(s.definition for s in senses),
            ids,
            tuple(index.sentences[i].tokens for i in ids),
            k,
            token_budget,
            seed,
        ))
    if jobs > 1 and len(tasks) > 1:
        chunk_count = min(len(tasks), jobs * 4)
        batches = [tasks[i::chunk_count] for i in range(chunk_count)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_build_batch, batches))
        entries: list[MdmEntry | None] = [None] * len(tasks)
        for b, batch in enumerate(results):
            for pos, entry in enumerate(batch):
                entries[b + pos * chunk_count] = entry
        return [e for e in entries if e is not None]
    return [_build_one(*t) for t in tasks]


def build_mdm_easy(sdm: Sequence[SdmEntry]) -> list[MdmEntry]:
    """Group aligned rows by word, preserving input order, so that
    contexts[i] pairs definitions[i] and N == M for every entry."""
    grouped: dict[str, list[SdmEntry]] = {}
    for entry in sdm:
        grouped.setdefault(entry.word, []).append(entry)
    return [
        MdmEntry(
            word=word,
            contexts=tuple(e.context for e in rows),
            definitions=tuple(e.definition for e in rows),
            aligned=True,
        )
        for word, rows in grouped.items()
    ]


def _ordered_unique(items: Iterable[str]) -> list[str]:
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def format_example(entry: MdmEntry, inv: SenseInventory | None = None) -> ModelExample:
    """Render an entry as role-prefixed source and <sep>-joined target.

    With an inventory, auxiliary target strings are attached: the word
    itself, and |-joined synonym/hypernym unions over the word's senses
    when non-empty.
    """
    source = f"word: {entry.word} context: {join_with_sep(entry.contexts)}"
    target = join_with_sep(entry.definitions)
    aux_word = aux_syn = aux_hyp = None
    if inv is not None:
        senses = inv.lookup(entry.word)
        if senses:
            aux_word = entry.word
            syns = _ordered_unique(s for sense in senses for s in sense.synonyms)
            hyps = _ordered_unique(h for sense in senses for h in sense.hypernyms)
            aux_syn = "|".join(syns) if syns else None
            aux_hyp = "|".join(hyps) if hyps else None
    return ModelExample(
        word=entry.word,
        source=source,
        target=target,
        aux_word=aux_word,
        aux_synonyms=aux_syn,
        aux_hypernyms=aux_hyp,
    )


def parse_example(source: str, target: str) -> tuple[str, list[str], list[str]]:
    """Invert format_example back to (word, contexts, definitions).

    Relies on words being single whitespace-free tokens, which inventory
    keys and corpus tokens always are.
    """
    if not source.startswith("word: "):
        raise ValueError("source does not start with the role prefix")
    head, sep, rest = source.partition(" context: ")
    if not sep:
        raise ValueError("source has no context section")
    word = head[len("word: "):]
    return word, split_on_sep(rest), split_on_sep(target)


# --- JSON-Lines adapters -------------------------------------------------

def mdm_to_json(entry: MdmEntry) -> dict:
    return {
        "word": entry.word,
        "contexts": list(entry.contexts),
        "definitions": list(entry.definitions),
        "aligned": entry.aligned,
    }


def mdm_from_json(row: dict) -> MdmEntry:
    return MdmEntry(
        word=row["word"],
        contexts=tuple(row["contexts"]),
        definitions=tuple(row["definitions"]),
        aligned=bool(row["aligned"]),
    )


def sdm_to_json(entry: SdmEntry) -> dict:
    row = {
        "word": entry.word,
        "context": entry.context,
        "definition": entry.definition,
        "sense_index": entry.sense_index,
    }
    if entry.pos is not None:
        row["pos"] = entry.pos
    if entry.context_unchecked:
        row["context_unchecked"] = True
    return row


def sdm_from_json(row: dict, validate: bool = True) -> SdmEntry:
    entry = SdmEntry(
        word=row["word"],
        context=row["context"],
        definition=row["definition"],
        sense_index=int(row["sense_index"]),
        pos=row.get("pos"),
        context_unchecked=bool(row.get("context_unchecked", False)),
    )
    if validate:
        entry.validate()
    return entry


def example_to_json(ex: ModelExample) -> dict:
    row = {"word": ex.word, "source": ex.source, "target": ex.target}
    if ex.aux_word is not None:
        row["aux_word"] = ex.aux_word
    if ex.aux_synonyms is not None:
        row["aux_synonyms"] = ex.aux_synonyms
    if ex.aux_hypernyms is not None:
        row["aux_hypernyms"] = ex.aux_hypernyms
    return row
