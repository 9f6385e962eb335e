import random

import pytest
from helpers import build_both, doc_names, make_corpus, make_query, oracle_topk, simple_inverted

from impact_bench.corpus import SparseVector
from impact_bench.daat import (
    END,
    Cursor,
    TopKHeap,
    WorkCounters,
    bmw,
    exhaustive_or,
    make_cursors,
    maxscore,
    score_document,
    wand,
)
from impact_bench.index import build_document_ordered

ENGINES = [exhaustive_or, wand, bmw, maxscore]

THREE = [
    SparseVector(((0, 2),)),            # D0: a=2
    SparseVector(((0, 5), (1, 1))),     # D1: a=5, b=1
    SparseVector(((1, 3),)),            # D2: b=3
]


def three_index():
    return build_document_ordered(THREE, doc_names(3), ["a", "b"])


class TestTopKHeap:
    def test_keeps_best_k(self):
        heap = TopKHeap(2)
        for docid, score in [(0, 5), (1, 9), (2, 7), (3, 1)]:
            heap.offer(docid, score)
        assert heap.result().entries == ((1, 9), (2, 7))

    def test_threshold_zero_until_full(self):
        heap = TopKHeap(3)
        heap.offer(0, 50)
        heap.offer(1, 40)
        assert heap.threshold == 0
        heap.offer(2, 30)
        assert heap.threshold == 30

    def test_equal_score_does_not_displace(self):
        heap = TopKHeap(1)
        heap.offer(4, 10)
        heap.offer(2, 10)
        assert heap.result().entries == ((4, 10),)

    def test_tie_order_in_result(self):
        heap = TopKHeap(4)
        for docid, score in [(7, 3), (1, 3), (5, 8), (3, 3)]:
            heap.offer(docid, score)
        assert heap.result().entries == ((5, 8), (1, 3), (3, 3), (7, 3))

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            TopKHeap(0)

    def test_result_threshold_property(self):
        heap = TopKHeap(2)
        heap.offer(0, 9)
        assert heap.result().threshold == 0
        heap.offer(1, 4)
        assert heap.result().threshold == 4


class TestCursor:
    def test_walk_and_counters(self):
        counters = WorkCounters()
        cursor = Cursor(three_index().lexicon[0], 2, counters)
        assert (cursor.docid, cursor.impact, cursor.contribution) == (0, 2, 4)
        assert cursor.max_score == 10
        assert counters.postings_visited == 1
        cursor.advance()
        assert (cursor.docid, cursor.contribution) == (1, 10)
        cursor.advance()
        assert cursor.docid == END
        assert counters.postings_visited == 2

    def test_seek_skips_intermediate_postings(self):
        corpus = [SparseVector(((0, 1),)) for _ in range(100)]
        idx = build_document_ordered(corpus, doc_names(100), ["a"])
        counters = WorkCounters()
        cursor = Cursor(idx.lexicon[0], 1, counters)
        cursor.seek(73)
        assert cursor.docid == 73
        assert counters.postings_visited == 2
        cursor.seek(73)  # no-op when already there
        assert counters.postings_visited == 2
        cursor.seek(100)
        assert cursor.docid == END

    def test_block_bound(self):
        corpus = [SparseVector(((0, 1),)) for _ in range(128)]
        corpus.append(SparseVector(((0, 100),)))
        idx = build_document_ordered(corpus, doc_names(129), ["a"])
        cursor = Cursor(idx.lexicon[0], 3, WorkCounters())
        assert cursor.block_bound(0) == (3, 127)
        assert cursor.block_bound(127) == (3, 127)
        assert cursor.block_bound(128) == (300, 128)
        assert cursor.block_bound(129) == (0, END)

    def test_score_document(self):
        idx = build_document_ordered(
            [SparseVector(((0, 4), (1, 5)))], ["D0"], ["a", "b"])
        cursors = make_cursors(SparseVector(((0, 2), (1, 3))), idx, WorkCounters())
        assert score_document(cursors) == 23

    def test_absent_terms_get_no_cursor(self):
        cursors = make_cursors(SparseVector(((0, 1), (9, 4))), three_index(), WorkCounters())
        assert [c.term for c in cursors] == [0]


class TestFixtureResults:
    def test_three_doc_top2(self):
        idx = three_index()
        query = SparseVector(((0, 1), (1, 1)))
        for engine in ENGINES:
            topk, _ = engine(query, idx, 2)
            assert topk.entries == ((1, 6), (2, 3)), engine.__name__

    def test_three_doc_all(self):
        idx = three_index()
        query = SparseVector(((0, 1), (1, 1)))
        for engine in ENGINES:
            topk, _ = engine(query, idx, 10)
            assert topk.entries == ((1, 6), (2, 3), (0, 2)), engine.__name__

    def test_empty_query(self):
        for engine in ENGINES:
            topk, counters = engine(SparseVector(()), three_index(), 5)
            assert topk.entries == ()
            assert counters.postings_visited == 0
            assert counters.docs_scored == 0

    def test_query_of_unknown_terms(self):
        for engine in ENGINES:
            topk, counters = engine(SparseVector(((7, 3),)), three_index(), 5)
            assert topk.entries == ()
            assert counters.postings_visited == 0

    def test_tied_scores_order_by_docid(self):
        corpus = [SparseVector(((0, 5),)) for _ in range(10)]
        idx = build_document_ordered(corpus, doc_names(10), ["a"])
        query = SparseVector(((0, 2),))
        for engine in ENGINES:
            topk, _ = engine(query, idx, 3)
            assert topk.entries == ((0, 10), (1, 10), (2, 10)), engine.__name__


class TestRankSafety:
    def test_agreement_with_oracle(self):
        rng = random.Random(61)
        for trial in range(120):
            n_docs = rng.randint(1, 250)
            vocab = rng.randint(1, 40)
            mode = "uniform" if trial % 3 == 2 else "zipf"
            corpus = make_corpus(rng, n_docs, vocab, 12, mode=mode)
            idx, _ = build_both(corpus)
            inverted = simple_inverted(corpus)
            for _ in range(2):
                query = make_query(rng, vocab, max_terms=10)
                k = rng.choice([1, 2, 5, 37, 1000])
                want = oracle_topk(inverted, query, k)
                for engine in ENGINES:
                    topk, _ = engine(query, idx, k)
                    assert list(topk.entries) == want, (engine.__name__, trial, k)

    def test_heavy_tie_corpus(self):
        # few distinct impacts so score collisions are everywhere
        rng = random.Random(62)
        corpus = make_corpus(rng, 150, 8, 5, max_impact=2)
        idx, _ = build_both(corpus)
        inverted = simple_inverted(corpus)
        for _ in range(40):
            query = make_query(rng, 8, max_terms=4, max_weight=2)
            k = rng.choice([1, 3, 10])
            want = oracle_topk(inverted, query, k)
            for engine in ENGINES:
                topk, _ = engine(query, idx, k)
                assert list(topk.entries) == want, engine.__name__


class TestCounters:
    def test_exhaustive_visits_every_posting(self):
        rng = random.Random(63)
        corpus = make_corpus(rng, 180, 25, 10)
        idx, _ = build_both(corpus)
        inverted = simple_inverted(corpus)
        for _ in range(20):
            query = make_query(rng, 25, max_terms=6)
            _, counters = exhaustive_or(query, idx, 10)
            total_df = sum(len(inverted.get(t, ())) for t, _ in query)
            matches = len({d for t, _ in query for d, _ in inverted.get(t, ())})
            assert counters.postings_visited == total_df
            assert counters.docs_scored == matches

    def test_pruning_never_exceeds_exhaustive(self):
        rng = random.Random(64)
        for _ in range(25):
            corpus = make_corpus(rng, rng.randint(30, 300), 20, 10)
            idx, _ = build_both(corpus)
            query = make_query(rng, 20, max_terms=6)
            k = rng.choice([1, 5, 20])
            _, base = exhaustive_or(query, idx, k)
            for engine in (wand, bmw, maxscore):
                _, counters = engine(query, idx, k)
                assert counters.docs_scored <= base.docs_scored
                assert counters.postings_visited <= base.postings_visited

    def test_single_term_maxscore_is_exhaustive(self):
        rng = random.Random(65)
        corpus = make_corpus(rng, 200, 5, 4)
        idx, _ = build_both(corpus)
        query = SparseVector(((0, 3),))
        df = idx.lexicon[0].df
        _, counters = maxscore(query, idx, 1000)
        assert counters.postings_visited == df
        assert counters.docs_scored == df

    def test_bmw_skips_flat_prefix_block(self):
        corpus = [SparseVector(((0, 1),)) for _ in range(128)]
        corpus.append(SparseVector(((0, 100),)))
        idx = build_document_ordered(corpus, doc_names(129), ["a"])
        query = SparseVector(((0, 1),))
        topk, counters = bmw(query, idx, 1)
        assert topk.entries == ((128, 100),)
        assert counters.blocks_skipped == 1
        # landings only: doc 0 on open, doc 1 after scoring it, doc 128 on the
        # skip; the 126 postings in between are never touched
        assert counters.postings_visited == 3
        assert counters.docs_scored == 2
        assert counters.pivot_selections == 3

    def test_wand_cannot_skip_without_block_maxima(self):
        # same fixture: the term-level bound never rules anything out
        corpus = [SparseVector(((0, 1),)) for _ in range(128)]
        corpus.append(SparseVector(((0, 100),)))
        idx = build_document_ordered(corpus, doc_names(129), ["a"])
        query = SparseVector(((0, 1),))
        topk, counters = wand(query, idx, 1)
        assert topk.entries == ((128, 100),)
        assert counters.postings_visited == 129
        assert counters.blocks_skipped == 0

    def test_flat_corpus_disables_pruning(self):
        rng = random.Random(66)
        corpus = make_corpus(rng, 120, 10, 6, mode="uniform", uniform_impact=4)
        idx, _ = build_both(corpus)
        for _ in range(10):
            query = make_query(rng, 10, max_terms=4)
            _, base = exhaustive_or(query, idx, 120)
            _, w = wand(query, idx, 120)
            _, b = bmw(query, idx, 120)
            assert w.docs_scored == base.docs_scored
            assert b.blocks_skipped == 0

    def test_wand_counts_pivots(self):
        idx = three_index()
        _, counters = wand(SparseVector(((0, 1), (1, 1))), idx, 2)
        assert counters.pivot_selections >= 1
