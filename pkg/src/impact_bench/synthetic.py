"""Seeded synthetic workloads: corpus, queries, and qrels.

Two impact modes.  `uniform` pins every impact to one constant, which kills
upper-bound pruning (term, block, and segment maxima all coincide).  `zipf`
draws impacts from a power law over [1, max_impact] and picks terms with a
power-law popularity skew, concentrating score mass in few postings the way
learned sparse models do.

Each query is sampled from a randomly chosen target document: a subset of its
terms with small integer weights.  The target becomes the query's single
relevant document in the qrels, so budget-limited engines that drop it pay in
RR@10.  Everything is driven by one `random.Random(seed)`, and identical
arguments produce byte-identical files.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import RawSparseVector, corpus_record_line, query_tsv_line
from .ioutil import atomic_write

IMPACT_MODES = ("uniform", "zipf")


@dataclass(frozen=True)
class SyntheticWorkload:
    docs: list[tuple[str, RawSparseVector]]
    queries: list[tuple[str, RawSparseVector]]
    qrels_rows: list[tuple[str, str, int]]


def _power_law_cumweights(n: int, s: float) -> list[float]:
    total = 0.0
    cum = []
    for rank in range(1, n + 1):
        total += rank ** -s
        cum.append(total)
    return cum


def generate_corpus(rng: random.Random, n_docs: int, vocab_size: int, mean_doc_len: int,
                    impact_mode: str = "zipf", zipf_s: float = 1.2,
                    max_impact: int = 255, uniform_impact: int = 1) -> list[tuple[str, RawSparseVector]]:
    if n_docs < 1 or vocab_size < 1 or mean_doc_len < 1:
        raise ValueError("n_docs, vocab_size, and mean_doc_len must be positive")
    if impact_mode not in IMPACT_MODES:
        raise ValueError(f"impact mode must be one of {IMPACT_MODES}")
    terms = [f"t{i}" for i in range(vocab_size)]
    term_cum = _power_law_cumweights(vocab_size, zipf_s) if impact_mode == "zipf" else None
    impact_cum = _power_law_cumweights(max_impact, zipf_s) if impact_mode == "zipf" else None
    lo = max(1, mean_doc_len // 2)
    hi = max(lo, mean_doc_len + mean_doc_len // 2)
    docs = []
    for i in range(n_docs):
        length = min(rng.randint(lo, hi), vocab_size)
        if term_cum is None:
            chosen = rng.sample(range(vocab_size), length)
        else:
            chosen = set()
            while len(chosen) < length:
                chosen.update(rng.choices(range(vocab_size), cum_weights=term_cum, k=length - len(chosen)))
            chosen = list(chosen)
        entries = []
        for term_idx in sorted(chosen):
            if impact_cum is None:
                impact = uniform_impact
            else:
                impact = rng.choices(range(1, max_impact + 1), cum_weights=impact_cum, k=1)[0]
            entries.append((terms[term_idx], float(impact)))
        entries.sort()
        docs.append((f"D{i}", RawSparseVector(tuple(entries))))
    return docs


def generate_queries(rng: random.Random, docs: list[tuple[str, RawSparseVector]],
                     n_queries: int, min_terms: int = 2, max_terms: int = 8,
                     max_weight: int = 8) -> tuple[list[tuple[str, RawSparseVector]], list[tuple[str, str, int]]]:
    """Sample each query's terms from one target document; the target is the
    query's relevant document, grade 1."""
    if n_queries < 1:
        raise ValueError("n_queries must be positive")
    candidates = [i for i, (_, vector) in enumerate(docs) if len(vector) > 0]
    if not candidates:
        raise ValueError("no non-empty documents to target")
    queries = []
    qrels_rows = []
    for qnum in range(n_queries):
        doc_name, vector = docs[rng.choice(candidates)]
        terms = [term for term, _ in vector]
        want = rng.randint(min_terms, max_terms)
        chosen = rng.sample(terms, min(want, len(terms)))
        entries = tuple(sorted((term, float(rng.randint(1, max_weight))) for term in chosen))
        qid = f"q{qnum}"
        queries.append((qid, RawSparseVector(entries)))
        qrels_rows.append((qid, doc_name, 1))
    return queries, qrels_rows


def generate_workload(seed: int, n_docs: int, vocab_size: int, mean_doc_len: int,
                      n_queries: int, impact_mode: str = "zipf", zipf_s: float = 1.2,
                      max_impact: int = 255, uniform_impact: int = 1,
                      min_terms: int = 2, max_terms: int = 8, max_weight: int = 8) -> SyntheticWorkload:
    rng = random.Random(seed)
    docs = generate_corpus(rng, n_docs, vocab_size, mean_doc_len, impact_mode,
                           zipf_s, max_impact, uniform_impact)
    queries, qrels_rows = generate_queries(rng, docs, n_queries, min_terms, max_terms, max_weight)
    return SyntheticWorkload(docs=docs, queries=queries, qrels_rows=qrels_rows)


def write_workload(workload: SyntheticWorkload, corpus_path, queries_path, qrels_path) -> None:
    with atomic_write(corpus_path) as handle:
        for name, vector in workload.docs:
            handle.write(corpus_record_line(name, vector) + "\n")
    with atomic_write(queries_path) as handle:
        for qid, vector in workload.queries:
            handle.write(query_tsv_line(qid, vector) + "\n")
    with atomic_write(qrels_path) as handle:
        for qid, doc_name, grade in workload.qrels_rows:
            handle.write(f"{qid} 0 {doc_name} {grade}\n")
