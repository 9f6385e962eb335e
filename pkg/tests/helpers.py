"""Shared fixtures and independent oracles for the test suite.

The oracles deliberately avoid the package's index, cursor, and traversal
machinery: scoring goes through a plain dict-of-lists inverted map, top-k
through a full sort, and budgets through a direct re-simulation of the
segment rule, so the engines are checked against straight-line code.
"""

from __future__ import annotations

import random

from impact_bench.corpus import SparseVector
from impact_bench.index import build_document_ordered, build_impact_ordered


def doc_names(n: int) -> list[str]:
    return [f"D{i}" for i in range(n)]


def power_law_cum(n: int, s: float) -> list[float]:
    total = 0.0
    out = []
    for rank in range(1, n + 1):
        total += rank ** -s
        out.append(total)
    return out


def make_corpus(rng: random.Random, n_docs: int, vocab: int, max_len: int,
                mode: str = "zipf", max_impact: int = 255,
                uniform_impact: int = 3, min_len: int = 1) -> list[SparseVector]:
    """Random quantized corpus, term choice uniform over the vocabulary.
    zipf mode draws impacts from a power law; uniform mode pins them all to
    one constant."""
    impact_cum = power_law_cum(max_impact, 1.2) if mode == "zipf" else None
    corpus = []
    for _ in range(n_docs):
        length = min(rng.randint(min_len, max_len), vocab)
        terms = sorted(rng.sample(range(vocab), length))
        if impact_cum is None:
            entries = tuple((t, uniform_impact) for t in terms)
        else:
            impacts = rng.choices(range(1, max_impact + 1), cum_weights=impact_cum, k=length)
            entries = tuple((t, imp) for t, imp in zip(terms, impacts))
        corpus.append(SparseVector(entries))
    return corpus


def make_query(rng: random.Random, vocab: int, min_terms: int = 1,
               max_terms: int = 30, max_weight: int = 8) -> SparseVector:
    n_terms = min(rng.randint(min_terms, max_terms), vocab)
    terms = sorted(rng.sample(range(vocab), n_terms))
    return SparseVector(tuple((t, rng.randint(1, max_weight)) for t in terms))


def build_both(corpus):
    names = doc_names(len(corpus))
    vocab = max((t for v in corpus for t, _ in v), default=-1) + 1
    terms = [f"t{i}" for i in range(vocab)]
    return (
        build_document_ordered(corpus, names, terms),
        build_impact_ordered(corpus, names, terms),
    )


def simple_inverted(corpus) -> dict[int, list[tuple[int, int]]]:
    inverted: dict[int, list[tuple[int, int]]] = {}
    for docid, vector in enumerate(corpus):
        for term, impact in vector:
            inverted.setdefault(term, []).append((docid, impact))
    return inverted


def oracle_scores(inverted, query) -> dict[int, int]:
    scores: dict[int, int] = {}
    for term, weight in query:
        for docid, impact in inverted.get(term, ()):
            scores[docid] = scores.get(docid, 0) + weight * impact
    return scores


def oracle_ranking(scores: dict[int, int]) -> list[tuple[int, int]]:
    return sorted(scores.items(), key=lambda e: (-e[1], e[0]))


def oracle_topk(corpus_or_inverted, query, k: int) -> list[tuple[int, int]]:
    inverted = (
        corpus_or_inverted
        if isinstance(corpus_or_inverted, dict)
        else simple_inverted(corpus_or_inverted)
    )
    return oracle_ranking(oracle_scores(inverted, query))[:k]


def simulate_budget(plan, rho) -> tuple[int, dict[int, int]]:
    """Replay the budget rule directly: start a segment only while consumed is
    below rho, finish whatever was started."""
    consumed = 0
    cells: dict[int, int] = {}
    for entry in plan:
        if rho is not None and consumed >= rho:
            break
        for docid in entry.docids:
            cells[docid] = cells.get(docid, 0) + entry.contribution
        consumed += entry.length
    return consumed, cells


def pareto_brute(points) -> list:
    """Quadratic dominance filter."""
    keep = []
    for p in points:
        dominated = False
        for q in points:
            if q is p:
                continue
            if (q.mean_latency <= p.mean_latency and q.effectiveness >= p.effectiveness
                    and (q.mean_latency < p.mean_latency or q.effectiveness > p.effectiveness)):
                dominated = True
                break
        if not dominated:
            keep.append(p)
    return keep
