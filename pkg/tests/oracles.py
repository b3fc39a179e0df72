"""Independent brute-force reference implementations used to check the
metric suite.  Everything here sticks to plain lists, explicit loops, and
Fractions; none of it shares code with defmod.metrics or defmod.kernels.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations


def ngram_list(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def clipped_overlap(cand_grams, ref_grams):
    clipped = 0
    for gram in set(cand_grams):
        clipped += min(cand_grams.count(gram), ref_grams.count(gram))
    return clipped


def bleu_sentence(cand, ref, max_n=4, smooth=False):
    """One pair's BLEU in [0, 1]: clipped precisions over the orders the
    candidate can populate, geometric mean, brevity penalty."""
    if not cand:
        return 0.0
    precisions = []
    for n in range(1, max_n + 1):
        cand_grams = ngram_list(cand, n)
        if not cand_grams:
            break
        clipped = clipped_overlap(cand_grams, ngram_list(ref, n))
        if clipped == 0:
            if smooth and n > 1:
                precisions.append(Fraction(1, len(cand_grams) + 1))
            else:
                return 0.0
        else:
            precisions.append(Fraction(clipped, len(cand_grams)))
    geo = 1.0
    for p in precisions:
        geo *= float(p) ** (1.0 / len(precisions))
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return bp * geo


def bleu_corpus(pairs, max_n=4):
    """Corpus BLEU in [0, 100] from pooled counts."""
    clipped = [0] * max_n
    totals = [0] * max_n
    sys_len = 0
    ref_len = 0
    for cand, ref in pairs:
        sys_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            cand_grams = ngram_list(cand, n)
            totals[n - 1] += len(cand_grams)
            clipped[n - 1] += clipped_overlap(cand_grams, ngram_list(ref, n))
    orders = [n for n in range(max_n) if totals[n] > 0]
    if not orders or sys_len == 0:
        return 0.0
    geo = 1.0
    for n in orders:
        if clipped[n] == 0:
            return 0.0
        geo *= float(Fraction(clipped[n], totals[n])) ** (1.0 / len(orders))
    bp = 1.0 if sys_len >= ref_len else math.exp(1.0 - ref_len / sys_len)
    return 100.0 * bp * geo


def bleu_sentence_avg(pairs, max_n=4):
    return 100.0 * sum(bleu_sentence(c, r, max_n, smooth=True) for c, r in pairs) / len(pairs)


def rouge_n_pair(cand, ref, n):
    """(precision, recall, f1) in [0, 1]; both-empty n-gram sets match
    vacuously, one-sided emptiness scores zero."""
    cand_grams = ngram_list(cand, n)
    ref_grams = ngram_list(ref, n)
    if not cand_grams and not ref_grams:
        return 1.0, 1.0, 1.0
    clipped = clipped_overlap(cand_grams, ref_grams)
    p = clipped / len(cand_grams) if cand_grams else 0.0
    r = clipped / len(ref_grams) if ref_grams else 0.0
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def lcs_by_enumeration(a, b):
    """Longest common subsequence by exhaustive enumeration of the shorter
    side's subsequences; only viable for lengths <= ~10."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for length in range(len(short), 0, -1):
        for picks in combinations(range(len(short)), length):
            sub = [short[i] for i in picks]
            it = iter(long_)
            if all(tok in it for tok in sub):
                return length
    return 0


def lcs_by_dp(a, b):
    """Plain quadratic list-of-lists LCS table."""
    rows = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                rows[i][j] = rows[i - 1][j - 1] + 1
            else:
                rows[i][j] = max(rows[i - 1][j], rows[i][j - 1])
    return rows[len(a)][len(b)]


def rouge_l_pair(cand, ref, lcs_fn=lcs_by_dp):
    if not cand:
        return 0.0, 0.0, 0.0
    lcs = lcs_fn(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    return dot / (nu * nv)


def greedy_pair(cand, ref, table):
    """(f1, skipped): greedy best-cosine matching over a token->vector dict,
    best similarities clamped to [0, 1], out-of-table tokens ignored."""
    cand_in = [t for t in cand if t in table]
    ref_in = [t for t in ref if t in table]
    if not cand_in or not ref_in:
        return None, True

    def side_mean(src, dst):
        total = 0.0
        for s in src:
            best = 0.0
            for t in dst:
                best = max(best, min(1.0, cosine(table[s], table[t])))
            total += best
        return total / len(src)

    p = side_mean(cand_in, ref_in)
    r = side_mean(ref_in, cand_in)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return f1, False


def greedy_corpus(pairs, table):
    scores = []
    for cand, ref in pairs:
        f1, skipped = greedy_pair(cand, ref, table)
        if not skipped:
            scores.append(f1)
    return 100.0 * sum(scores) / len(scores) if scores else 0.0


def distinct(grouped, n):
    """(intra, inter) in [0, 100] over grouped token lists."""
    per_def = []
    per_entry = []
    for defs in grouped:
        pooled = []
        for toks in defs:
            grams = ngram_list(toks, n)
            per_def.append(len(set(grams)) / len(grams) if grams else 1.0)
            pooled += grams
        per_entry.append(len(set(pooled)) / len(pooled) if pooled else 1.0)
    intra = 100.0 * sum(per_def) / len(per_def)
    inter = 100.0 * sum(per_entry) / len(per_entry)
    return intra, inter
