"""Score-at-a-time evaluation over impact-ordered indexes.

Postings are processed segment by segment in descending contribution order
(query weight times segment impact), adding each contribution into a
fixed-width accumulator table.  An optional budget of rho postings makes the
traversal anytime: a segment is started only while fewer than rho postings
have been consumed, and a started segment always finishes, so consumed never
exceeds rho plus the length of the last started segment minus one.

With no budget (rho None) and 32-bit accumulators the extracted top-k is
identical, scores and tie order included, to the document-at-a-time engines:
both sum the same integers, only in a different order.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from .corpus import SparseVector
from .daat import TopK
from .index import ImpactOrderedIndex

ACCUMULATOR_WIDTHS = (16, 32)


class AccumulatorOverflow(OverflowError):
    """A document's accumulated score no longer fits the configured width."""

    def __init__(self, docid: int, width: int):
        super().__init__(f"accumulator for doc {docid} exceeds {width}-bit capacity")
        self.docid = docid
        self.width = width


class AccumulatorTable:
    """Per-document score cells with O(1) logical reset.

    Each cell carries the generation it was last written in; a stale
    generation reads as zero, so reset is a counter bump rather than a sweep
    of all n_docs cells.  Cells are capped at 2^width - 1; exceeding the cap
    raises instead of wrapping.
    """

    __slots__ = ("n_docs", "width", "limit", "_values", "_gens", "_gen", "_touched")

    def __init__(self, n_docs: int, width: int = 32):
        if width not in ACCUMULATOR_WIDTHS:
            raise ValueError(f"width must be one of {ACCUMULATOR_WIDTHS}")
        if n_docs < 0:
            raise ValueError("n_docs must be non-negative")
        self.n_docs = n_docs
        self.width = width
        self.limit = (1 << width) - 1
        self._values = [0] * n_docs
        self._gens = [-1] * n_docs
        self._gen = 0
        self._touched: list[int] = []

    def reset(self) -> None:
        self._gen += 1
        self._touched = []

    def add(self, docid: int, amount: int) -> None:
        if self._gens[docid] == self._gen:
            value = self._values[docid] + amount
        else:
            value = amount
            self._gens[docid] = self._gen
            self._touched.append(docid)
        if value > self.limit:
            raise AccumulatorOverflow(docid, self.width)
        self._values[docid] = value

    def value(self, docid: int) -> int:
        if self._gens[docid] == self._gen:
            return self._values[docid]
        return 0

    def touched(self) -> list[int]:
        """Docids written since the last reset, in first-touch order."""
        return self._touched


@dataclass(frozen=True)
class SegmentPlanEntry:
    """One segment scheduled for traversal: its contribution (query weight
    times segment impact) and the docids it will touch."""

    term: int
    segment_index: int
    contribution: int
    length: int
    docids: tuple[int, ...]


@dataclass
class Budget:
    """Postings budget; rho None means unbounded."""

    rho: int | None = None
    consumed: int = 0

    def __post_init__(self):
        if self.rho is not None and self.rho < 0:
            raise ValueError("rho must be non-negative")

    def can_start_segment(self) -> bool:
        return self.rho is None or self.consumed < self.rho


def plan_segments(query: SparseVector, index: ImpactOrderedIndex) -> list[SegmentPlanEntry]:
    """Flatten the query's segments into one schedule, highest contribution
    first; ties fall back to term id then segment index so plans are stable.
    Query terms absent from the index contribute nothing."""
    plan = []
    for term, weight in query:
        segments = index.lexicon.get(term)
        if segments is None:
            continue
        for seg_idx, segment in enumerate(segments):
            plan.append(SegmentPlanEntry(
                term=term,
                segment_index=seg_idx,
                contribution=weight * segment.impact,
                length=len(segment),
                docids=segment.docids,
            ))
    plan.sort(key=lambda e: (-e.contribution, e.term, e.segment_index))
    return plan


def traverse(plan, budget: Budget, accumulators: AccumulatorTable) -> int:
    """Process segments in plan order until the budget refuses to start
    another.  Returns the postings consumed (also recorded on the budget)."""
    for entry in plan:
        if not budget.can_start_segment():
            break
        contribution = entry.contribution
        for docid in entry.docids:
            accumulators.add(docid, contribution)
        budget.consumed += entry.length
    return budget.consumed


def extract_topk(accumulators: AccumulatorTable, k: int) -> TopK:
    """Rank touched documents by accumulated score, same tie rule as the
    document-at-a-time engines."""
    if k < 1:
        raise ValueError("k must be positive")
    best = heapq.nsmallest(k, ((-accumulators.value(d), d) for d in accumulators.touched()))
    entries = tuple((docid, -neg) for neg, docid in best)
    return TopK(k=k, entries=entries)


@dataclass(frozen=True)
class SaatResult:
    topk: TopK
    consumed: int
    elapsed_ns: int


def saat_search(query: SparseVector, index: ImpactOrderedIndex, k: int,
                rho: int | None = None, width: int = 32,
                accumulators: AccumulatorTable | None = None) -> SaatResult:
    """Plan, traverse under the budget, extract.  A caller-supplied
    accumulator table is reset and reused, so sweeps do not reallocate."""
    if accumulators is None:
        accumulators = AccumulatorTable(index.n_docs, width)
    else:
        if accumulators.n_docs != index.n_docs:
            raise ValueError("accumulator table sized for a different corpus")
        if accumulators.width != width:
            raise ValueError("accumulator table has a different width")
    start = time.perf_counter_ns()
    accumulators.reset()
    plan = plan_segments(query, index)
    budget = Budget(rho=rho)
    consumed = traverse(plan, budget, accumulators)
    topk = extract_topk(accumulators, k)
    elapsed = time.perf_counter_ns() - start
    return SaatResult(topk=topk, consumed=consumed, elapsed_ns=elapsed)
