"""BM25 weighting and global linear quantization.

Both engine families run integer arithmetic over one quantized substrate, so
real-valued weights (BM25 or pre-learned) are mapped to small integer impacts
here.  Quantization is global linear: levels are spread evenly over
[0, global_max] with 2^bits - 1 steps, and any positive weight is floored to
impact 1 so that matching documents never vanish from disjunctive results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Lexicon, RawSparseVector, SparseVector


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.82
    b: float = 0.68

    def __post_init__(self):
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


@dataclass(frozen=True)
class QuantizerConfig:
    bits: int = 8
    global_max: float = 1.0

    def __post_init__(self):
        if not 2 <= self.bits <= 16:
            raise ValueError("bits must lie in [2, 16]")
        if not (self.global_max > 0 and math.isfinite(self.global_max)):
            raise ValueError("global_max must be positive and finite")

    @property
    def max_level(self) -> int:
        return (1 << self.bits) - 1


def bm25_weight(tf: float, df: int, doclen: float, avg_doclen: float, n_docs: int, params: Bm25Params = Bm25Params()) -> float:
    """BM25 term weight with the non-negative log-odds idf."""
    if avg_doclen <= 0:
        raise ValueError("avg_doclen must be positive")
    if tf == 0:
        return 0.0
    idf = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
    norm = params.k1 * (1.0 - params.b + params.b * doclen / avg_doclen)
    return idf * tf / (tf + norm)


def apply_bm25(raw_corpus: Sequence[RawSparseVector], params: Bm25Params = Bm25Params()) -> list[RawSparseVector]:
    """Reweight a term-frequency corpus with BM25.

    Input weights are interpreted as term frequencies; document length is the
    sum of frequencies and document frequency counts documents containing the
    term.  Returns a parallel list of real-valued vectors.
    """
    n_docs = len(raw_corpus)
    if n_docs == 0:
        return []
    df: dict[str, int] = {}
    doclens = []
    for vector in raw_corpus:
        doclens.append(sum(w for _, w in vector))
        for term, _ in vector:
            df[term] = df.get(term, 0) + 1
    avg_doclen = sum(doclens) / n_docs
    weighted = []
    for vector, doclen in zip(raw_corpus, doclens):
        entries = tuple(
            (term, bm25_weight(tf, df[term], doclen, avg_doclen, n_docs, params))
            for term, tf in vector
        )
        weighted.append(RawSparseVector(entries))
    return weighted


def quantize(weight: float, config: QuantizerConfig) -> int:
    """Map one weight to an integer level in [0, 2^bits - 1].

    Zero stays zero; any positive weight maps to at least 1.  Rounding is
    Python's round-half-even.
    """
    if weight < 0:
        raise ValueError("weights must be non-negative")
    if weight > config.global_max:
        raise ValueError(f"weight {weight} exceeds global_max {config.global_max}")
    if weight == 0:
        return 0
    return max(1, round(weight / config.global_max * config.max_level))


def dequantize(level: int, config: QuantizerConfig) -> float:
    return level * config.global_max / config.max_level


def _all_integral(raw_corpus: Iterable[RawSparseVector], max_level: int) -> bool:
    for vector in raw_corpus:
        for _, weight in vector:
            if not float(weight).is_integer() or weight > max_level:
                return False
    return True


def _global_max(raw_corpus: Iterable[RawSparseVector]) -> float:
    best = 0.0
    for vector in raw_corpus:
        for _, weight in vector:
            if weight > best:
                best = weight
    return best


def _to_sparse(vector: RawSparseVector, lexicon: Lexicon, to_impact, drop_unknown: bool) -> SparseVector:
    entries = []
    for term, weight in vector:
        term_id = lexicon.term_id(term)
        if term_id is None:
            if drop_unknown:
                continue
            raise ValueError(f"term {term!r} is not in the lexicon")
        impact = to_impact(weight)
        if impact > 0:
            entries.append((term_id, impact))
    entries.sort()
    return SparseVector(tuple(entries))


def quantize_corpus(raw_corpus: Sequence[RawSparseVector], lexicon: Lexicon, bits: int = 8) -> tuple[list[SparseVector], QuantizerConfig]:
    """Quantize a whole corpus against its global maximum weight.

    When every weight is already an integer within range, values pass through
    unchanged, so pre-quantized corpora are not re-quantized.  Every term must
    be present in `lexicon`.
    """
    if len(raw_corpus) == 0:
        raise ValueError("corpus is empty")
    global_max = _global_max(raw_corpus)
    config = QuantizerConfig(bits=bits, global_max=global_max if global_max > 0 else 1.0)
    if _all_integral(raw_corpus, config.max_level):
        to_impact = int
    else:
        to_impact = lambda w: quantize(w, config)
    vectors = [_to_sparse(v, lexicon, to_impact, drop_unknown=False) for v in raw_corpus]
    return vectors, config


def quantize_queries(raw_queries: Sequence[tuple[str, RawSparseVector]], lexicon: Lexicon, bits: int = 8) -> tuple[list[tuple[str, SparseVector]], QuantizerConfig]:
    """Quantize queries with the same scheme as the corpus, against the query
    set's own maximum.  Terms missing from the lexicon are dropped: they match
    nothing, so no engine can use them.
    """
    vectors_only = [v for _, v in raw_queries]
    global_max = _global_max(vectors_only)
    config = QuantizerConfig(bits=bits, global_max=global_max if global_max > 0 else 1.0)
    if _all_integral(vectors_only, config.max_level):
        to_impact = int
    else:
        to_impact = lambda w: quantize(w, config)
    out = [(qid, _to_sparse(v, lexicon, to_impact, drop_unknown=True)) for qid, v in raw_queries]
    return out, config
