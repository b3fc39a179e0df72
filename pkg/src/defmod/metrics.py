"""Evaluation metrics: BLEU, ROUGE-1/2/L, embedding greedy matching,
Distinct-N (intra/inter), headword overlap rate, and dataset statistics.

Candidate and reference strings are compared on whitespace tokens, so the
"<sep>" delimiter is scored like any other token: a prediction that drops
or garbles it loses n-gram and LCS matches.  All corpus scores are on a
0-100 scale; per-entry scores are reported on the same scale.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .builder import MdmEntry
from .corpus import tokenize


@dataclass(frozen=True)
class MetricReport:
    """A scored metric: corpus aggregate, per-entry breakdown, config echo."""

    name: str
    corpus_score: float
    per_entry: list[tuple[object, float | None]]
    config: dict
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "metric": self.name,
            "corpus_score": self.corpus_score,
            "config": self.config,
            "per_entry": [[i, s] for i, s in self.per_entry],
            "details": self.details,
        }


@dataclass(frozen=True)
class EmbeddingTable:
    """Token -> unit-normalized vector table loaded from TSV."""

    dim: int
    vectors: dict[str, np.ndarray]
    ids: dict[str, int]

    def __contains__(self, token: str) -> bool:
        return token in self.vectors


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read ``token\\tv1\\t...\\tvd`` rows; vectors are unit-normalized."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}: line {lineno}: expected token and components")
            token = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: bad component ({exc})") from exc
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(
                    f"{path}: line {lineno}: dimension {vec.size} != {dim}"
                )
            if np.isnan(vec).any():
                raise ValueError(f"{path}: line {lineno}: NaN component")
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ValueError(f"{path}: line {lineno}: zero vector for {token!r}")
            vectors[token] = vec / norm
    if not vectors:
        raise ValueError(f"{path}: empty embedding table")
    ids = {tok: i for i, tok in enumerate(vectors)}
    return EmbeddingTable(dim=dim, vectors=vectors, ids=ids)


def _toks(text: str) -> list[str]:
    return text.split()


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_and_total(cand: Sequence[str], ref: Sequence[str], n: int) -> tuple[int, int]:
    cand_counts = _ngram_counts(cand, n)
    ref_counts = _ngram_counts(ref, n)
    clipped = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    return clipped, max(len(cand) - n + 1, 0)


def _check_pairs(pairs: Sequence[tuple[str, str]], require_ref: bool) -> None:
    if not pairs:
        raise ValueError("pairs must be non-empty")
    if require_ref:
        for i, (_, ref) in enumerate(pairs):
            if not ref.split():
                raise ValueError(f"pair {i}: empty reference")


def _sentence_bleu(
    cand: Sequence[str], ref: Sequence[str], max_n: int, smooth: bool
) -> float:
    """One pair's BLEU in [0, 1]. Orders the candidate cannot populate are
    skipped (effective order); with ``smooth``, zero counts at orders >= 2
    take add-one smoothing instead of zeroing the score."""
    if not cand:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        clipped, total = _clipped_and_total(cand, ref, n)
        if total == 0:
            break
        orders += 1
        if clipped == 0:
            if smooth and n > 1:
                log_sum += math.log(1.0 / (total + 1))
            else:
                return 0.0
        else:
            log_sum += math.log(clipped / total)
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return bp * math.exp(log_sum / orders)


def bleu(
    pairs: Sequence[tuple[str, str]],
    max_n: int = 4,
    variant: str = "corpus",
    ids: Sequence[object] | None = None,
) -> MetricReport:
    """Modified n-gram precision BLEU with brevity penalty, scaled to [0, 100].

    ``corpus`` pools clipped/total counts over all pairs before the
    geometric mean; ``sentence_avg`` scores each pair with add-one
    smoothing on zero higher-order counts and averages.  Empty candidates
    score 0 and are listed under details["empty_candidates"].
    """
    _check_pairs(pairs, require_ref=False)
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if variant not in ("corpus", "sentence_avg"):
        raise ValueError(f"unknown bleu variant {variant!r}")
    ids = list(ids) if ids is not None else list(range(len(pairs)))
    toks = [(_toks(c), _toks(r)) for c, r in pairs]

    per_entry: list[tuple[object, float | None]] = []
    empty = []
    for eid, (cand, ref) in zip(ids, toks):
        if not cand:
            empty.append(eid)
        score = _sentence_bleu(cand, ref, max_n, smooth=(variant == "sentence_avg"))
        per_entry.append((eid, 100.0 * score))

    if variant == "sentence_avg":
        corpus_score = sum(s for _, s in per_entry) / len(per_entry)
    else:
        clipped = [0] * max_n
        total = [0] * max_n
        sys_len = 0
        ref_len = 0
        for cand, ref in toks:
            sys_len += len(cand)
            ref_len += len(ref)
            for n in range(1, max_n + 1):
                c, t = _clipped_and_total(cand, ref, n)
                clipped[n - 1] += c
                total[n - 1] += t
        effective = 0
        while effective < max_n and total[effective] > 0:
            effective += 1
        if effective == 0 or sys_len == 0 or any(clipped[i] == 0 for i in range(effective)):
            corpus_score = 0.0
        else:
            log_sum = sum(math.log(clipped[i] / total[i]) for i in range(effective))
            bp = 1.0 if sys_len >= ref_len else math.exp(1.0 - ref_len / sys_len)
            corpus_score = 100.0 * bp * math.exp(log_sum / effective)

    return MetricReport(
        name="bleu",
        corpus_score=corpus_score,
        per_entry=per_entry,
        config={"max_n": max_n, "variant": variant},
        details={"empty_candidates": empty} if empty else {},
    )


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0.0 else 2.0 * p * r / (p + r)


def rouge_n(
    pairs: Sequence[tuple[str, str]],
    n: int,
    ids: Sequence[object] | None = None,
) -> MetricReport:
    """Per-entry F1 of clipped n-gram overlap, corpus score = mean F1 x 100.

    When both sides have no n-grams of order ``n`` (both shorter than n
    tokens) the pair counts as a vacuous perfect match; when only one side
    has none, it scores 0.
    """
    _check_pairs(pairs, require_ref=True)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    ids = list(ids) if ids is not None else list(range(len(pairs)))
    per_entry = []
    pr = []
    for eid, (c, r) in zip(ids, pairs):
        cand, ref = _toks(c), _toks(r)
        clipped, cand_total = _clipped_and_total(cand, ref, n)
        ref_total = max(len(ref) - n + 1, 0)
        if cand_total == 0 and ref_total == 0:
            p = rec = 1.0
        else:
            p = clipped / cand_total if cand_total else 0.0
            rec = clipped / ref_total if ref_total else 0.0
        f1 = _f1(p, rec)
        per_entry.append((eid, 100.0 * f1))
        pr.append([eid, 100.0 * p, 100.0 * rec])
    corpus_score = sum(s for _, s in per_entry) / len(per_entry)
    return MetricReport(
        name=f"rouge{n}",
        corpus_score=corpus_score,
        per_entry=per_entry,
        config={"n": n},
        details={"per_entry_precision_recall": pr},
    )


def _encode_pair(cand: list[str], ref: list[str]) -> tuple[np.ndarray, np.ndarray]:
    vocab: dict[str, int] = {}
    for tok in cand + ref:
        vocab.setdefault(tok, len(vocab))
    a = np.fromiter((vocab[t] for t in cand), dtype=np.int64, count=len(cand))
    b = np.fromiter((vocab[t] for t in ref), dtype=np.int64, count=len(ref))
    return a, b


def rouge_l(
    pairs: Sequence[tuple[str, str]],
    ids: Sequence[object] | None = None,
) -> MetricReport:
    """F1 from longest-common-subsequence length over whitespace tokens."""
    _check_pairs(pairs, require_ref=True)
    ids = list(ids) if ids is not None else list(range(len(pairs)))
    per_entry = []
    pr = []
    for eid, (c, r) in zip(ids, pairs):
        cand, ref = _toks(c), _toks(r)
        if not cand:
            per_entry.append((eid, 0.0))
            pr.append([eid, 0.0, 0.0])
            continue
        a, b = _encode_pair(cand, ref)
        lcs = kernels.lcs_length(a, b)
        p = lcs / len(cand)
        rec = lcs / len(ref)
        f1 = _f1(p, rec)
        per_entry.append((eid, 100.0 * f1))
        pr.append([eid, 100.0 * p, 100.0 * rec])
    corpus_score = sum(s for _, s in per_entry) / len(per_entry)
    return MetricReport(
        name="rougeL",
        corpus_score=corpus_score,
        per_entry=per_entry,
        config={"backend": kernels.backend_name()},
        details={"per_entry_precision_recall": pr},
    )


def _side_matrix(
    tokens: list[str], table: EmbeddingTable
) -> tuple[np.ndarray, np.ndarray, list[int], int]:
    """Unit vectors and table ids for the in-table tokens of one side.

    Returns (vectors, ids, occurrence->row map, missing count); one row per
    distinct in-table token, occurrences mapped onto rows so that means
    stay occurrence-weighted.
    """
    rows: dict[str, int] = {}
    occ = []
    missing = 0
    for tok in tokens:
        if tok not in table.vectors:
            missing += 1
            continue
        occ.append(rows.setdefault(tok, len(rows)))
    if not rows:
        return np.empty((0, table.dim)), np.empty(0, dtype=np.int64), occ, missing
    mat = np.stack([table.vectors[t] for t in rows])
    tids = np.fromiter((table.ids[t] for t in rows), dtype=np.int64, count=len(rows))
    return mat, tids, occ, missing


def greedy_match_score(
    pairs: Sequence[tuple[str, str]],
    table: EmbeddingTable,
    ids: Sequence[object] | None = None,
) -> MetricReport:
    """Greedy token-matching F1 over an embedding table, scaled to [0, 100].

    Precision is the mean, over candidate tokens found in the table, of the
    best cosine similarity to any in-table reference token (identical
    tokens match at exactly 1.0; similarities clamped to [0, 1]); recall is
    symmetric.  Tokens missing from the table are skipped and folded into
    the coverage figure; a pair whose candidate or reference has no
    in-table token at all is reported as skipped (score null).
    """
    _check_pairs(pairs, require_ref=False)
    if not table.vectors:
        raise ValueError("embedding table is empty")
    ids = list(ids) if ids is not None else list(range(len(pairs)))
    per_entry: list[tuple[object, float | None]] = []
    skipped = []
    found = 0
    total = 0
    scores = []
    for eid, (c, r) in zip(ids, pairs):
        cand, ref = _toks(c), _toks(r)
        cmat, cids, cocc, cmiss = _side_matrix(cand, table)
        rmat, rids, rocc, rmiss = _side_matrix(ref, table)
        total += len(cand) + len(ref)
        found += (len(cand) - cmiss) + (len(ref) - rmiss)
        if not cocc or not rocc:
            per_entry.append((eid, None))
            skipped.append(eid)
            continue
        best_c = kernels.greedy_best_sims(cmat, rmat, cids, rids)
        best_r = kernels.greedy_best_sims(rmat, cmat, rids, cids)
        p = float(sum(best_c[i] for i in cocc)) / len(cocc)
        rec = float(sum(best_r[i] for i in rocc)) / len(rocc)
        f1 = _f1(p, rec)
        scores.append(f1)
        per_entry.append((eid, 100.0 * f1))
    corpus_score = 100.0 * sum(scores) / len(scores) if scores else 0.0
    return MetricReport(
        name="bs",
        corpus_score=corpus_score,
        per_entry=per_entry,
        config={"dim": table.dim, "backend": kernels.backend_name()},
        details={
            "coverage": (found / total) if total else 0.0,
            "skipped": skipped,
        },
    )


@dataclass(frozen=True)
class DistinctResult:
    intra: float
    inter: float
    per_definition_intra: list[float]
    per_entry_inter: list[float]


def distinct_n(predictions: Sequence[Sequence[str]], n: int) -> DistinctResult:
    """Distinct-N diversity over grouped predicted definitions, x 100.

    intra: mean over every individual definition of unique/total n-grams
    within it; inter: mean over entries of unique/total n-grams pooled
    across the entry's definitions.  A definition (or entry pool) with
    fewer than n tokens contributes 1.0 by convention.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    for i, defs in enumerate(predictions):
        if not defs:
            raise ValueError(f"entry {i}: empty prediction list")

    per_def = []
    per_entry = []
    for defs in predictions:
        pooled: list[tuple[str, ...]] = []
        for d in defs:
            grams = [tuple(t) for t in _sliding(_toks(d), n)]
            per_def.append(len(set(grams)) / len(grams) if grams else 1.0)
            pooled.extend(grams)
        per_entry.append(len(set(pooled)) / len(pooled) if pooled else 1.0)

    intra = 100.0 * sum(per_def) / len(per_def) if per_def else 100.0
    inter = 100.0 * sum(per_entry) / len(per_entry) if per_entry else 100.0
    return DistinctResult(
        intra=intra,
        inter=inter,
        per_definition_intra=[100.0 * v for v in per_def],
        per_entry_inter=[100.0 * v for v in per_entry],
    )


def _sliding(tokens: list[str], n: int) -> list[list[str]]:
    return [tokens[i : i + n] for i in range(len(tokens) - n + 1)]


def overlap_flags(entries: Sequence[tuple[str, Sequence[str]]]) -> list[bool]:
    """One flag per definition: does its token list contain the headword?

    Definitions are tokenized with the corpus tokenizer so trailing
    punctuation does not mask a match; the comparison is exact lowercase.
    """
    flags = []
    for word, defs in entries:
        target = word.lower()
        for d in defs:
            flags.append(target in tokenize(d))
    return flags


def overlap_rate(entries: Sequence[tuple[str, Sequence[str]]]) -> float:
    """Percentage of definitions whose tokens contain their own headword."""
    flags = overlap_flags(entries)
    if not flags:
        return 0.0
    return 100.0 * sum(flags) / len(flags)


def dataset_stats(dataset: Sequence[MdmEntry]) -> dict:
    """Entry count plus mean context tokens, contexts, and definitions."""
    if not dataset:
        return {
            "entries": 0,
            "mean_context_tokens": 0.0,
            "mean_contexts": 0.0,
            "mean_definitions": 0.0,
        }
    token_counts = [sum(len(c.split()) for c in e.contexts) for e in dataset]
    return {
        "entries": len(dataset),
        "mean_context_tokens": sum(token_counts) / len(dataset),
        "mean_contexts": sum(len(e.contexts) for e in dataset) / len(dataset),
        "mean_definitions": sum(len(e.definitions) for e in dataset) / len(dataset),
    }
