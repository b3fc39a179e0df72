"""Corpus ingestion: sentence splitting, lowercase tokenization, and a
word -> sentence inverted index with frequency filtering.

Everything here is deterministic for a fixed input ordering; the index
builder may shard documents across processes but merges shard results in
document order, so worker count never changes the output.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_MIN_COUNT = 5

# Terminal punctuation that may end a sentence mid-line.
_TERMINALS = frozenset(".!?")

# Chunks ending in "." that do not terminate a sentence (compared lowercase).
DEFAULT_ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "rev.", "hon.", "sr.", "jr.",
    "st.", "mt.", "etc.", "e.g.", "i.e.", "cf.", "vs.", "no.", "dept.",
    "est.", "fig.", "al.", "inc.", "ltd.", "co.",
})

INDEX_FORMAT = "defmod-index"
INDEX_VERSION = 1


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into word tokens.

    Whitespace-separated chunks are lowercased, then leading and trailing
    non-alphanumeric characters are peeled off as single-character tokens.
    Internal punctuation (apostrophes, hyphens, anything not at an edge)
    stays inside the token, so "don't" and "3.5" survive intact.  A chunk
    with no alphanumeric character at all ("@-@", "...", "!") is kept whole
    as one standalone punctuation token.
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        if not any(ch.isalnum() for ch in chunk):
            tokens.append(chunk)
            continue
        start = 0
        end = len(chunk)
        while not chunk[start].isalnum():
            start += 1
        while not chunk[end - 1].isalnum():
            end -= 1
        tokens.extend(chunk[:start])
        tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


def split_sentences(
    document: str,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> list[str]:
    """Split a document into raw sentence strings.

    A line boundary always ends a sentence.  Within a line, a run of
    terminal punctuation (``. ! ?``) followed by whitespace ends one,
    unless the whitespace-delimited chunk it closes is a listed
    abbreviation ("mr.", "e.g.", ...).  Sentences are returned trimmed;
    blank lines contribute nothing, and no non-whitespace character of the
    input is ever dropped.
    """
    sentences: list[str] = []
    for line in document.splitlines():
        n = len(line)
        start = 0
        i = 0
        while i < n:
            if line[i] not in _TERMINALS:
                i += 1
                continue
            j = i
            while j + 1 < n and line[j + 1] in _TERMINALS:
                j += 1
            if j + 1 < n and not line[j + 1].isspace():
                i = j + 1
                continue
            k = i
            while k > start and not line[k - 1].isspace():
                k -= 1
            if line[k : j + 1].lower() in abbreviations:
                i = j + 1
                continue
            piece = line[start : j + 1].strip()
            if piece:
                sentences.append(piece)
            start = j + 1
            i = j + 1
        tail = line[start:].strip()
        if tail:
            sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class Sentence:
    """One corpus sentence; ``id`` is its stable position in the corpus."""

    id: int
    tokens: tuple[str, ...]
    raw: str


@dataclass(frozen=True)
class CorpusIndex:
    """Inverted word -> sentence-id index over a tokenized corpus.

    Only words whose total occurrence count reaches ``min_count`` are
    indexed; posting lists are ascending sentence ids.  Instances are
    immutable and safe to share across threads.
    """

    sentences: tuple[Sentence, ...]
    postings: dict[str, tuple[int, ...]]
    frequency: dict[str, int]
    min_count: int

    def words(self) -> list[str]:
        return sorted(self.postings)

    def sentences_for(self, word: str) -> list[Sentence]:
        return [self.sentences[i] for i in self.postings.get(word.lower(), ())]


def _doc_sentences(
    document: str, abbreviations: frozenset[str]
) -> list[tuple[str, tuple[str, ...]]]:
    out = []
    for raw in split_sentences(document, abbreviations):
        toks = tuple(tokenize(raw))
        if toks:
            out.append((raw, toks))
    return out


def _chunk_worker(
    documents: list[str], abbreviations: frozenset[str]
) -> list[list[tuple[str, tuple[str, ...]]]]:
    return [_doc_sentences(doc, abbreviations) for doc in documents]


def _assemble(
    per_doc: Iterable[list[tuple[str, tuple[str, ...]]]], min_count: int
) -> CorpusIndex:
    sentences: list[Sentence] = []
    for doc in per_doc:
        for raw, toks in doc:
            sentences.append(Sentence(id=len(sentences), tokens=toks, raw=raw))

    frequency: Counter[str] = Counter()
    for sent in sentences:
        frequency.update(sent.tokens)
    kept = {w: c for w, c in frequency.items() if c >= min_count}

    postings: dict[str, list[int]] = {}
    for sent in sentences:
        for word in sorted(set(sent.tokens)):
            if word in kept:
                postings.setdefault(word, []).append(sent.id)

    return CorpusIndex(
        sentences=tuple(sentences),
        postings={w: tuple(ids) for w, ids in sorted(postings.items())},
        frequency=dict(sorted(kept.items())),
        min_count=min_count,
    )


def build_index(
    documents: Iterable[str],
    min_count: int = DEFAULT_MIN_COUNT,
    jobs: int = 1,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> CorpusIndex:
    """Tokenize documents and build a frequency-filtered inverted index.

    ``jobs`` > 1 shards whole documents across worker processes; shards are
    merged in document order, so the result is identical to a serial run.
    An empty corpus yields a valid empty index.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    docs = list(documents)
    if jobs > 1 and len(docs) > 1:
        chunk_count = min(len(docs), jobs * 4)
        chunks = [docs[i::chunk_count] for i in range(chunk_count)]
        # Round-robin sharding: reassemble in original document order.
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            shard_results = list(
                pool.map(partial(_chunk_worker, abbreviations=abbreviations), chunks)
            )
        per_doc: list[list[tuple[str, tuple[str, ...]]]] = [[] for _ in docs]
        for shard_idx, shard in enumerate(shard_results):
            for pos, doc_sents in enumerate(shard):
                per_doc[shard_idx + pos * chunk_count] = doc_sents
    else:
        per_doc = [_doc_sentences(doc, abbreviations) for doc in docs]
    return _assemble(per_doc, min_count)


def read_documents(paths: Sequence[str | Path], doc_mode: str = "file") -> list[str]:
    """Read UTF-8 corpus files into document strings.

    ``doc_mode`` "file" treats each file as one document; "block" splits
    files on blank lines into one document per block.  Directory paths are
    expanded to their sorted ``*.txt`` members.
    """
    if doc_mode not in ("file", "block"):
        raise ValueError(f"doc_mode must be 'file' or 'block', got {doc_mode!r}")
    files: list[Path] = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            files.extend(sorted(p.glob("*.txt")))
        else:
            files.append(p)
    documents = []
    for f in files:
        text = f.read_text(encoding="utf-8")
        if doc_mode == "file":
            documents.append(text)
        else:
            for block in text.split("\n\n"):
                if block.strip():
                    documents.append(block)
    return documents


def dump_index(index: CorpusIndex) -> dict:
    """Serializable form of an index; postings are rebuilt on load."""
    return {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "min_count": index.min_count,
        "sentences": [
            {"id": s.id, "raw": s.raw, "tokens": list(s.tokens)}
            for s in index.sentences
        ],
    }


def save_index(index: CorpusIndex, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dump_index(index), fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_index(path: str | Path) -> CorpusIndex:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("format") != INDEX_FORMAT:
        raise ValueError(f"{path}: not a {INDEX_FORMAT} file")
    if data.get("version") != INDEX_VERSION:
        raise ValueError(f"{path}: unsupported index version {data.get('version')!r}")
    per_doc = [
        [(row["raw"], tuple(row["tokens"])) for row in data["sentences"]]
    ]
    index = _assemble(per_doc, data["min_count"])
    for row, sent in zip(data["sentences"], index.sentences):
        if row["id"] != sent.id:
            raise ValueError(f"{path}: non-contiguous sentence ids")
    return index
