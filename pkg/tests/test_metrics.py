import math
import random

import numpy as np
import pytest

import oracles
from defmod.builder import MdmEntry
from defmod.metrics import (
    EmbeddingTable,
    bleu,
    dataset_stats,
    distinct_n,
    greedy_match_score,
    load_embeddings,
    overlap_rate,
    rouge_l,
    rouge_n,
)


def make_table(tokens, dim=4, seed=0):
    rng = np.random.default_rng(seed)
    vectors = {}
    ids = {}
    for i, tok in enumerate(tokens):
        v = rng.normal(size=dim)
        vectors[tok] = v / np.linalg.norm(v)
        ids[tok] = i
    return EmbeddingTable(dim=dim, vectors=vectors, ids=ids)


class TestBleu:
    def test_identity_is_100(self):
        pairs = [("the cat sat", "the cat sat"), ("a b c d e", "a b c d e")]
        assert bleu(pairs).corpus_score == 100.0
        assert bleu(pairs, variant="sentence_avg").corpus_score == 100.0

    def test_short_candidate_against_long_reference(self):
        # unigrams and the single bigram match perfectly; BP = exp(1 - 6/2)
        report = bleu([("the cat", "the cat sat on the mat")])
        assert report.corpus_score == pytest.approx(100.0 * math.exp(-2.0), abs=1e-9)

    def test_disjoint_tokens_zero(self):
        assert bleu([("x y z", "a b c")]).corpus_score == 0.0

    def test_empty_candidate_flagged(self):
        report = bleu([("", "a b"), ("a b", "a b")])
        assert report.per_entry[0][1] == 0.0
        assert report.details["empty_candidates"] == [0]

    def test_clipping_limits_repeats(self):
        # "the the the" vs "the cat": clipped unigram count is 1 of 3
        report = bleu([("the the the", "the cat")], max_n=1)
        assert report.corpus_score == pytest.approx(100.0 / 3.0, abs=1e-9)

    def test_matches_oracle_on_random_pairs(self):
        rng = random.Random(13)
        vocab = list("abcde")
        pairs = []
        for _ in range(60):
            cand = " ".join(rng.choices(vocab, k=rng.randint(0, 8)))
            ref = " ".join(rng.choices(vocab, k=rng.randint(1, 8)))
            pairs.append((cand, ref))
        tok_pairs = [(c.split(), r.split()) for c, r in pairs]
        assert bleu(pairs).corpus_score == pytest.approx(
            oracles.bleu_corpus(tok_pairs), abs=1e-9
        )
        assert bleu(pairs, variant="sentence_avg").corpus_score == pytest.approx(
            oracles.bleu_sentence_avg(tok_pairs), abs=1e-9
        )

    def test_empty_pairs_rejected(self):
        with pytest.raises(ValueError):
            bleu([])

    def test_config_echoed(self):
        report = bleu([("a", "a")], max_n=2, variant="sentence_avg")
        assert report.config == {"max_n": 2, "variant": "sentence_avg"}


class TestRougeN:
    def test_spec_example(self):
        report = rouge_n([("a b c", "a c d")], n=1)
        assert report.corpus_score == pytest.approx(100 * 2 / 3, abs=1e-9)

    def test_identity_100(self):
        for n in (1, 2):
            assert rouge_n([("x y z", "x y z")], n=n).corpus_score == 100.0

    def test_identity_100_even_for_short_strings(self):
        assert rouge_n([("a", "a")], n=2).corpus_score == 100.0

    def test_one_sided_shortness_scores_zero(self):
        assert rouge_n([("a", "a b")], n=2).corpus_score == 0.0

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError, match="empty reference"):
            rouge_n([("a", "")], n=1)

    def test_f1_is_harmonic_mean_of_reported_pr(self):
        rng = random.Random(5)
        pairs = [
            (" ".join(rng.choices("abcd", k=rng.randint(1, 6))),
             " ".join(rng.choices("abcd", k=rng.randint(1, 6))))
            for _ in range(40)
        ]
        report = rouge_n(pairs, n=2)
        for (eid, f1), (eid2, p, r) in zip(
            report.per_entry, report.details["per_entry_precision_recall"]
        ):
            assert eid == eid2
            expect = 0.0 if p + r == 0 else 2 * p * r / (p + r)
            assert f1 == pytest.approx(expect, abs=1e-9)


class TestRougeL:
    def test_spec_example(self):
        report = rouge_l([("a b c d", "a c b d")])
        assert report.corpus_score == pytest.approx(75.0, abs=1e-9)

    def test_identity_100(self):
        assert rouge_l([("u v w", "u v w")]).corpus_score == 100.0

    def test_empty_candidate_zero(self):
        report = rouge_l([("", "a b")])
        assert report.per_entry[0][1] == 0.0

    def test_lcs_agrees_with_enumeration_up_to_8_tokens(self):
        rng = random.Random(11)
        for _ in range(80):
            cand = rng.choices("abc", k=rng.randint(1, 8))
            ref = rng.choices("abc", k=rng.randint(1, 8))
            got = rouge_l([(" ".join(cand), " ".join(ref))]).per_entry[0][1]
            lcs = oracles.lcs_by_enumeration(cand, ref)
            p, r = lcs / len(cand), lcs / len(ref)
            expect = 0.0 if p + r == 0 else 100 * 2 * p * r / (p + r)
            assert got == pytest.approx(expect, abs=1e-9)


class TestGreedyMatch:
    def test_identity_exactly_100(self):
        table = make_table(["a", "b", "c"])
        report = greedy_match_score([("a b c", "a b c")], table)
        assert report.corpus_score == 100.0

    def test_orthogonal_disjoint_zero(self):
        table = EmbeddingTable(
            dim=2,
            vectors={"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])},
            ids={"a": 0, "b": 1},
        )
        assert greedy_match_score([("a", "b")], table).corpus_score == 0.0

    def test_hand_computed_cosine(self):
        root2 = math.sqrt(2.0)
        table = EmbeddingTable(
            dim=2,
            vectors={
                "a": np.array([1.0, 0.0]),
                "b": np.array([1.0 / root2, 1.0 / root2]),
                "c": np.array([0.0, 1.0]),
            },
            ids={"a": 0, "b": 1, "c": 2},
        )
        report = greedy_match_score([("a", "b c")], table)
        # P = cos(a, b) = sqrt(2)/2; R = mean(cos(b,a), cos(c,a)) = (sqrt(2)/2)/2
        p = root2 / 2
        r = (root2 / 2 + 0.0) / 2
        assert report.corpus_score == pytest.approx(100 * 2 * p * r / (p + r), abs=1e-9)

    def test_precision_of_spec_example(self):
        root2 = math.sqrt(2.0)
        table = EmbeddingTable(
            dim=2,
            vectors={
                "a": np.array([1.0, 0.0]),
                "b": np.array([1.0 / root2, 1.0 / root2]),
                "c": np.array([0.0, 1.0]),
            },
            ids={"a": 0, "b": 1, "c": 2},
        )
        f1, skipped = oracles.greedy_pair(["a"], ["b", "c"], {
            "a": [1.0, 0.0], "b": [1 / root2, 1 / root2], "c": [0.0, 1.0],
        })
        report = greedy_match_score([("a", "b c")], table)
        assert not skipped
        assert report.corpus_score == pytest.approx(100 * f1, abs=1e-9)

    def test_missing_tokens_skipped_and_covered(self):
        table = make_table(["a", "b"])
        report = greedy_match_score([("a zzz", "b a")], table)
        assert report.details["coverage"] == pytest.approx(3 / 4)

    def test_all_missing_side_reports_skipped(self):
        table = make_table(["a"])
        report = greedy_match_score([("zzz", "a"), ("a", "a")], table)
        assert report.per_entry[0][1] is None
        assert report.details["skipped"] == [0]
        assert report.corpus_score == 100.0  # only the scored pair counts

    def test_swapping_candidate_and_reference_preserves_f1(self):
        # precision(c, r) == recall(r, c), so F1 must be direction-free
        table = make_table(list("abcdef"), seed=3)
        rng = random.Random(9)
        for _ in range(20):
            c = " ".join(rng.choices("abcdef", k=rng.randint(1, 6)))
            r = " ".join(rng.choices("abcdef", k=rng.randint(1, 6)))
            fwd = greedy_match_score([(c, r)], table).corpus_score
            rev = greedy_match_score([(r, c)], table).corpus_score
            assert fwd == pytest.approx(rev, abs=1e-12)


class TestDistinct:
    def test_repeated_unigram_intra(self):
        result = distinct_n([["the the"]], n=1)
        assert result.intra == pytest.approx(50.0)

    def test_identical_definitions_halve_inter(self):
        result = distinct_n([["a b c", "a b c"]], n=2)
        assert result.inter == pytest.approx(50.0)
        assert result.intra == pytest.approx(100.0)

    def test_all_distinct_is_100(self):
        result = distinct_n([["a b", "c d"], ["e f"]], n=2)
        assert result.intra == 100.0
        assert result.inter == 100.0

    def test_short_definitions_contribute_one(self):
        result = distinct_n([["x"]], n=2)
        assert result.intra == 100.0
        assert result.inter == 100.0

    def test_matches_oracle(self):
        rng = random.Random(3)
        groups = []
        for _ in range(30):
            defs = [
                " ".join(rng.choices("abcd", k=rng.randint(0, 6)))
                for _ in range(rng.randint(1, 3))
            ]
            groups.append(defs)
        got = distinct_n(groups, n=2)
        want_intra, want_inter = oracles.distinct(
            [[d.split() for d in defs] for defs in groups], 2
        )
        assert got.intra == pytest.approx(want_intra, abs=1e-9)
        assert got.inter == pytest.approx(want_inter, abs=1e-9)

    def test_empty_entry_rejected(self):
        with pytest.raises(ValueError):
            distinct_n([[]], n=1)


class TestOverlap:
    def test_headword_in_definition(self):
        rate = overlap_rate([("damson", ["pearl-like fruit of the damson tree"])])
        assert rate == 100.0

    def test_half_overlapping(self):
        rate = overlap_rate([
            ("ban", ["a ban on smoking"]),
            ("mope", ["low spirits"]),
        ])
        assert rate == 50.0

    def test_no_overlap(self):
        assert overlap_rate([("ban", ["a decree"]), ("mope", ["low spirits"])]) == 0.0

    def test_punctuation_does_not_mask_match(self):
        assert overlap_rate([("ban", ["they lifted the ban."])]) == 100.0

    def test_case_insensitive(self):
        assert overlap_rate([("Ban", ["the Ban held"])]) == 100.0

    def test_empty_input(self):
        assert overlap_rate([]) == 0.0


class TestDatasetStats:
    def test_mean_context_tokens(self):
        entries = [
            MdmEntry("a", ("one two", "three four"), ("d",), aligned=False),
            MdmEntry("b", ("uno dos tres cuatro cinco seis",), ("d", "e"), aligned=False),
        ]
        stats = dataset_stats(entries)
        assert stats["entries"] == 2
        assert stats["mean_context_tokens"] == pytest.approx(5.0)
        assert stats["mean_contexts"] == pytest.approx(1.5)
        assert stats["mean_definitions"] == pytest.approx(1.5)

    def test_empty_dataset(self):
        stats = dataset_stats([])
        assert stats == {
            "entries": 0,
            "mean_context_tokens": 0.0,
            "mean_contexts": 0.0,
            "mean_definitions": 0.0,
        }


class TestEmbeddingIO:
    def test_load_and_normalize(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("a\t3\t0\nb\t0\t4\n", encoding="utf-8")
        table = load_embeddings(path)
        assert table.dim == 2
        assert np.allclose(np.linalg.norm(table.vectors["a"]), 1.0)

    def test_dimension_mismatch_rejected(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("a\t1\t0\nb\t1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="line 2"):
            load_embeddings(path)

    def test_zero_vector_rejected(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("a\t0\t0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="zero vector"):
            load_embeddings(path)

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("a\tnan\t1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="NaN"):
            load_embeddings(path)
